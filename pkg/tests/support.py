"""Independent realizability checks for type tables, driven by the SAT oracle."""
from omqcw.normal import nnf
from omqcw.oracle import oracle_sat
from omqcw.parsing import parse_ontology
from omqcw.syntax import Atom, Database, Ontology, cname, fand, fatom, fforall, fnot, neg

MARK = "Zmark"

# Fixed corpus for type-table checks: six ALCI and six GF2 ontologies.
TYPE_CORPUS = [
    "top <= bot",
    "top <= A",
    "top <= ~A | <r>.A",
    "top <= [r].A | <r->.B",
    "top <= <r>.top & [r-].~A",
    "top <= A & <r>.~A",
    "(forall x (forall y (-> (r x y) (<-> (A x) (A y)))))",
    "(forall x (-> (= x x) (exists y (and (r x y) (not (A y))))))\n(forall x (-> (= x x) (A x)))",
    "(forall x (-> (A x) (exists y (and (r y x) (B y)))))\n(forall x (forall y (-> (r x y) (not (B y)))))",
    "(exists x (and (= x x) (and (A x) (not (A x)))))",
    "(forall x (-> (= x x) (or (r x x) (exists y (and (s x y) (A y))))))",
    "(forall x (forall y (-> (r x y) (r y x))))\n(exists x (and (= x x) (exists y (and (r x y) (A y)))))",
]


def corpus():
    return [parse_ontology(t) for t in TYPE_CORPUS]


def alci_type_realizable(table, t, extra=3) -> bool:
    """Some model of the ontology has an element whose cl-type is exactly t."""
    m = cname(MARK)
    cis = list(table.ontology.cis)
    for i, c in enumerate(table.cl):
        cis.append((m, c if t >> i & 1 else nnf(neg(c))))
    return oracle_sat(Ontology("ALCI", cis), Database([Atom(MARK, ("c",))]), extra=extra)


def _base_formula(kind, x):
    if kind == "u":
        return fatom(x, "x")
    if kind == "s":
        return fatom(x, "x", "x")
    return x


def _type_formula(table, t):
    return fand(*[_base_formula(k, x) if t >> i & 1 else fnot(_base_formula(k, x))
                  for i, (k, x) in enumerate(table.base)])


def gf2_type_realizable(table, t, extra=3) -> bool:
    sents = list(table.ontology.sentences)
    sents.append(fforall(("x",), fatom(MARK, "x"), _type_formula(table, t)))
    return oracle_sat(Ontology("GF2", sentences=sents), Database([Atom(MARK, ("c",))]), extra=extra)


def gf2_pair_realizable(table, a, m, b, extra=2) -> bool:
    """Two distinct elements with 1-types a and b and exactly the role atoms in m between them."""
    sents = list(table.ontology.sentences)
    sents.append(fforall(("x",), fatom(MARK + "a", "x"), _type_formula(table, a)))
    sents.append(fforall(("x",), fatom(MARK + "b", "x"), _type_formula(table, b)))
    lits = []
    for j, r in enumerate(table.roles):
        for bit, atom in ((2 * j, fatom(r, "x", "y")), (2 * j + 1, fatom(r, "y", "x"))):
            lits.append(atom if m >> bit & 1 else fnot(atom))
    if lits:
        sents.append(fforall(("x", "y"), fatom(MARK + "p", "x", "y"), fand(*lits)))
    db = Database([Atom(MARK + "a", ("c",)), Atom(MARK + "b", ("d",)), Atom(MARK + "p", ("c", "d"))])
    return oracle_sat(Ontology("GF2", sentences=sents), db, extra=extra)


def type_table_mismatches(o, limit_pairs=40):
    """Types whose survival disagrees with small-model realizability; empty when sound."""
    from omqcw.normal import normalize_ontology
    from omqcw.typesys import alci_types, gf2_types
    bad = []
    if o.dialect == "GF2":
        tb = gf2_types(o)
        for t in tb.candidates:
            if (t in tb.type_set) != gf2_type_realizable(tb, t):
                bad.append(("1-type", t))
        pairs = [(a, m, b) for a in tb.types for b in tb.types for m in tb.all_M
                 if tb.zero_type(a) == tb.zero_type(b)]
        step = max(1, len(pairs) // limit_pairs)
        for a, m, b in pairs[::step]:
            if tb.valid(a, m, b) != gf2_pair_realizable(tb, a, m, b):
                bad.append(("2-type", (a, m, b)))
    else:
        tb = alci_types(normalize_ontology(o))
        for t in tb.candidates:
            if (t in tb.type_set) != alci_type_realizable(tb, t):
                bad.append(("type", t))
    return bad


def permute_labels(s, perm):
    """Copy of a k-expression with every label l replaced by perm[l]."""
    from omqcw.kexpr import AddRole, Intro, Relabel, Union
    if isinstance(s, Intro):
        return Intro(perm[s.label], s.const, s.facts)
    if isinstance(s, Union):
        return Union(permute_labels(s.left, perm), permute_labels(s.right, perm))
    if isinstance(s, AddRole):
        return AddRole(s.role, perm[s.src], perm[s.dst], permute_labels(s.child, perm))
    return Relabel(perm[s.src], perm[s.dst], permute_labels(s.child, perm))
