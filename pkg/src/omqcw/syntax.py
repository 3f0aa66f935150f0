"""Abstract syntax for concepts, guarded two-variable formulas, databases and queries.

All syntax objects are immutable tuples so they hash and compare cheaply.
"""
from __future__ import annotations

from typing import Iterable, NamedTuple

RESERVED_PREFIX = "@"
TOP_PRED = "top"


def is_label(pred: str) -> bool:
    return len(pred) > 1 and pred[0] == "L" and pred[1:].isdigit()


def label_index(pred: str) -> int:
    return int(pred[1:])


def label_pred(i: int) -> str:
    return "L%d" % i


def is_reserved(name: str) -> bool:
    return name.startswith(RESERVED_PREFIX) or is_label(name)


# ---------------------------------------------------------------- roles

class Role(NamedTuple):
    name: str
    inv: bool = False

    def inverse(self) -> "Role":
        return Role(self.name, not self.inv)

    def __str__(self):
        return self.name + "-" if self.inv else self.name


# ---------------------------------------------------------------- concepts

class Concept(NamedTuple):
    """ALCI concept. ``op`` is one of top, bot, name, not, and, or, ex, all, eqex.

    ``eqex`` is the ALC= constructor <r>.[A1,...,An]= with the names kept in ``args``.
    """
    op: str
    args: tuple = ()
    name: str = ""
    role: Role | None = None

    def __str__(self):
        return concept_str(self)


TOP = Concept("top")
BOT = Concept("bot")


def cname(n: str) -> Concept:
    return Concept("name", name=n)


def neg(c: Concept) -> Concept:
    return Concept("not", (c,))


def conj(*cs: Concept) -> Concept:
    flat = []
    for c in cs:
        if c.op == "and":
            flat.extend(c.args)
        elif c.op != "top":
            flat.append(c)
    if not flat:
        return TOP
    if len(flat) == 1:
        return flat[0]
    return Concept("and", tuple(flat))


def disj(*cs: Concept) -> Concept:
    flat = []
    for c in cs:
        if c.op == "or":
            flat.extend(c.args)
        elif c.op != "bot":
            flat.append(c)
    if not flat:
        return BOT
    if len(flat) == 1:
        return flat[0]
    return Concept("or", tuple(flat))


def exists(role: Role, c: Concept) -> Concept:
    return Concept("ex", (c,), role=role)


def forall(role: Role, c: Concept) -> Concept:
    return Concept("all", (c,), role=role)


def eq_exists(role: Role, names: Iterable[str]) -> Concept:
    return Concept("eqex", tuple(names), role=role)


def concept_str(c: Concept) -> str:
    op = c.op
    if op == "top":
        return "top"
    if op == "bot":
        return "bot"
    if op == "name":
        return c.name
    if op == "not":
        return "~" + concept_str(c.args[0])
    if op == "and":
        return "(" + " & ".join(concept_str(a) for a in c.args) + ")"
    if op == "or":
        return "(" + " | ".join(concept_str(a) for a in c.args) + ")"
    if op == "ex":
        return "<%s>.%s" % (c.role, concept_str(c.args[0]))
    if op == "all":
        return "[%s].%s" % (c.role, concept_str(c.args[0]))
    if op == "eqex":
        return "<%s>.[%s]=" % (c.role, ",".join(c.args))
    raise ValueError(op)


def concept_size(c: Concept) -> int:
    if c.op == "eqex":
        return 2 + len(c.args)
    n = 1
    if c.op in ("ex", "all"):
        n += 1
    for a in c.args:
        n += concept_size(a)
    return n


def concept_names(c: Concept, acc: set | None = None) -> set:
    acc = set() if acc is None else acc
    if c.op == "name":
        acc.add(c.name)
    elif c.op == "eqex":
        acc.update(c.args)
    else:
        for a in c.args:
            concept_names(a, acc)
    return acc


def concept_roles(c: Concept, acc: set | None = None) -> set:
    acc = set() if acc is None else acc
    if c.role is not None:
        acc.add(c.role.name)
    if c.op != "eqex":
        for a in c.args:
            concept_roles(a, acc)
    return acc


def has_inverse(c: Concept) -> bool:
    if c.role is not None and c.role.inv:
        return True
    return c.op != "eqex" and any(has_inverse(a) for a in c.args)


# ---------------------------------------------------------------- GF2 formulas

VARS = ("x", "y")


class Formula(NamedTuple):
    """Guarded two-variable formula.

    ops: atom (pred, vars), eq (vars), not, and, or, true, false,
    forall / exists with ``vars`` the bound variables and ``args`` = (guard, body).
    """
    op: str
    args: tuple = ()
    pred: str = ""
    vars: tuple = ()

    def __str__(self):
        return formula_str(self)


TRUE = Formula("true")
FALSE = Formula("false")


def fatom(pred: str, *vs: str) -> Formula:
    return Formula("atom", pred=pred, vars=tuple(vs))


def feq(a: str, b: str) -> Formula:
    return Formula("eq", vars=(a, b))


def fnot(f: Formula) -> Formula:
    if f.op == "true":
        return FALSE
    if f.op == "false":
        return TRUE
    return Formula("not", (f,))


def fand(*fs: Formula) -> Formula:
    flat = []
    for f in fs:
        if f.op == "and":
            flat.extend(f.args)
        elif f.op == "false":
            return FALSE
        elif f.op != "true":
            flat.append(f)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return Formula("and", tuple(flat))


def f_or(*fs: Formula) -> Formula:
    flat = []
    for f in fs:
        if f.op == "or":
            flat.extend(f.args)
        elif f.op == "true":
            return TRUE
        elif f.op != "false":
            flat.append(f)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Formula("or", tuple(flat))


def fimp(a: Formula, b: Formula) -> Formula:
    return f_or(fnot(a), b)


def fiff(a: Formula, b: Formula) -> Formula:
    return fand(f_or(fnot(a), b), f_or(a, fnot(b)))


def fforall(vs, guard: Formula, body: Formula) -> Formula:
    return Formula("forall", (guard, body), vars=tuple(vs))


def fexists(vs, guard: Formula, body: Formula) -> Formula:
    return Formula("exists", (guard, body), vars=tuple(vs))


_FV_CACHE: dict = {}


def free_vars(f: Formula) -> frozenset:
    r = _FV_CACHE.get(f)
    if r is not None:
        return r
    op = f.op
    if op in ("atom", "eq"):
        r = frozenset(f.vars)
    elif op in ("true", "false"):
        r = frozenset()
    elif op in ("forall", "exists"):
        r = (free_vars(f.args[0]) | free_vars(f.args[1])) - set(f.vars)
    else:
        r = frozenset().union(*(free_vars(a) for a in f.args))
    if len(_FV_CACHE) > 500000:
        _FV_CACHE.clear()
    _FV_CACHE[f] = r
    return r


def formula_str(f: Formula) -> str:
    op = f.op
    if op == "atom":
        return "(%s %s)" % (f.pred, " ".join(f.vars))
    if op == "eq":
        return "(= %s %s)" % f.vars
    if op in ("true", "false"):
        return op
    if op == "not":
        return "(not %s)" % formula_str(f.args[0])
    if op in ("and", "or"):
        return "(%s %s)" % (op, " ".join(formula_str(a) for a in f.args))
    guard, body = f.args
    inner = ("(-> %s %s)" if op == "forall" else "(and %s %s)") % (
        formula_str(guard), formula_str(body))
    for v in reversed(f.vars):
        inner = "(%s %s %s)" % (op, v, inner)
    return inner


def formula_size(f: Formula) -> int:
    if f.op in ("atom", "eq"):
        return 1 + len(f.vars)
    n = 1 + len(f.vars)
    for a in f.args:
        n += formula_size(a)
    return n


def formula_preds(f: Formula, acc: dict | None = None) -> dict:
    """Map predicate -> arity for every relation symbol in ``f``."""
    acc = {} if acc is None else acc
    if f.op == "atom":
        acc[f.pred] = len(f.vars)
    for a in f.args:
        formula_preds(a, acc)
    return acc


def swap_xy(f: Formula) -> Formula:
    """Rename x <-> y everywhere (bound and free); semantics-preserving relabelling."""
    sw = {"x": "y", "y": "x"}
    op = f.op
    if op in ("atom", "eq"):
        return f._replace(vars=tuple(sw.get(v, v) for v in f.vars))
    if op in ("true", "false"):
        return f
    return f._replace(args=tuple(swap_xy(a) for a in f.args),
                      vars=tuple(sw.get(v, v) for v in f.vars))


# ---------------------------------------------------------------- ontologies

class Ontology:
    """A set of CIs (ALC / ALCI) or GF2 sentences."""

    __slots__ = ("dialect", "cis", "sentences")

    def __init__(self, dialect: str, cis=(), sentences=()):
        self.dialect = dialect
        self.cis = tuple(cis)
        self.sentences = tuple(sentences)

    def __eq__(self, other):
        return (isinstance(other, Ontology) and self.dialect == other.dialect
                and self.cis == other.cis and self.sentences == other.sentences)

    def __hash__(self):
        return hash((self.dialect, self.cis, self.sentences))

    def __repr__(self):
        return "Ontology(%s, %d CIs, %d sentences)" % (
            self.dialect, len(self.cis), len(self.sentences))

    def size(self) -> int:
        """Size measured as AST node count (one extra node per CI / sentence)."""
        n = 0
        for l, r in self.cis:
            n += 1 + concept_size(l) + concept_size(r)
        for s in self.sentences:
            n += 1 + formula_size(s)
        return n

    def concept_names(self) -> set:
        acc = set()
        for l, r in self.cis:
            concept_names(l, acc)
            concept_names(r, acc)
        for s in self.sentences:
            acc.update(p for p, a in formula_preds(s).items() if a == 1)
        return acc

    def role_names(self) -> set:
        acc = set()
        for l, r in self.cis:
            concept_roles(l, acc)
            concept_roles(r, acc)
        for s in self.sentences:
            acc.update(p for p, a in formula_preds(s).items() if a == 2)
        return acc

    def text(self) -> str:
        lines = []
        if self.dialect == "GF2":
            lines = [formula_str(s) for s in self.sentences]
        else:
            lines = ["%s <= %s" % (concept_str(l), concept_str(r)) for l, r in self.cis]
        return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------- facts / atoms

class Atom(NamedTuple):
    """A fact A(c) / r(c,d) or a query atom over variables."""
    pred: str
    args: tuple

    def __str__(self):
        return "%s(%s)" % (self.pred, ",".join(self.args))


class Database:
    """Finite set of unary and binary facts. Label facts L1, L2, ... are ordinary facts."""

    __slots__ = ("facts", "_adom", "_unary", "_binary")

    def __init__(self, facts: Iterable[Atom] = ()):
        self.facts = frozenset(facts)
        for f in self.facts:
            if len(f.args) not in (1, 2):
                raise ValueError("fact arity must be 1 or 2: %s" % (f,))
        self._adom = None
        self._unary = None
        self._binary = None

    def __eq__(self, other):
        return isinstance(other, Database) and self.facts == other.facts

    def __hash__(self):
        return hash(self.facts)

    def __len__(self):
        return len(self.facts)

    def __iter__(self):
        return iter(self.facts)

    def __repr__(self):
        return "Database(%d facts)" % len(self.facts)

    @property
    def adom(self) -> frozenset:
        if self._adom is None:
            self._adom = frozenset(c for f in self.facts for c in f.args)
        return self._adom

    def _index(self):
        un: dict = {}
        bi: dict = {}
        for f in self.facts:
            if len(f.args) == 1:
                un.setdefault(f.args[0], set()).add(f.pred)
            else:
                bi.setdefault(f.args, set()).add(f.pred)
        self._unary, self._binary = un, bi

    def unary_of(self, c) -> set:
        if self._unary is None:
            self._index()
        return self._unary.get(c, set())

    def roles_between(self, a, b) -> set:
        if self._binary is None:
            self._index()
        return self._binary.get((a, b), set())

    def binary_pairs(self):
        if self._binary is None:
            self._index()
        return self._binary

    def role_names(self) -> set:
        return {f.pred for f in self.facts if len(f.args) == 2}

    def concept_names(self) -> set:
        return {f.pred for f in self.facts if len(f.args) == 1
                and not is_label(f.pred) and f.pred != TOP_PRED}

    def without_labels(self) -> "Database":
        return Database(f for f in self.facts if not is_label(f.pred))

    def restrict(self, consts) -> "Database":
        cs = set(consts)
        return Database(f for f in self.facts if all(a in cs for a in f.args))

    def union(self, facts: Iterable[Atom]) -> "Database":
        return Database(self.facts | frozenset(facts))

    def text(self) -> str:
        return "".join(str(f) + "\n" for f in sorted(self.facts))


# ---------------------------------------------------------------- queries

class CQ(NamedTuple):
    atoms: frozenset
    answer: tuple = ()

    def vars(self) -> frozenset:
        return frozenset(v for a in self.atoms for v in a.args)

    def __str__(self):
        return "q(%s) := %s" % (",".join(self.answer),
                                 ", ".join(str(a) for a in sorted(self.atoms)))


class UCQ(NamedTuple):
    cqs: tuple
    answer: tuple = ()

    def __str__(self):
        return "\n".join(str(c) for c in self.cqs)

    def size(self) -> int:
        return sum(len(c.atoms) for c in self.cqs)

    def is_boolean(self) -> bool:
        return not self.answer

    def preds(self) -> dict:
        acc = {}
        for c in self.cqs:
            for a in c.atoms:
                acc[a.pred] = len(a.args)
        return acc


def cq_vars(atoms) -> frozenset:
    return frozenset(v for a in atoms for v in a.args)


# ---------------------------------------------------------------- interpretations

class Interpretation:
    """Finite interpretation with concept and role extensions."""

    __slots__ = ("domain", "unary", "binary")

    def __init__(self, domain, unary=None, binary=None):
        self.domain = tuple(domain)
        self.unary = {k: set(v) for k, v in (unary or {}).items()}
        self.binary = {k: set(v) for k, v in (binary or {}).items()}

    @classmethod
    def from_database(cls, db: Database, extra=()):
        un: dict = {}
        bi: dict = {}
        for f in db.facts:
            if len(f.args) == 1:
                un.setdefault(f.pred, set()).add(f.args[0])
            else:
                bi.setdefault(f.pred, set()).add(f.args)
        return cls(sorted(db.adom) + list(extra), un, bi)

    def has_unary(self, pred, d) -> bool:
        if pred == TOP_PRED:
            return True
        return d in self.unary.get(pred, ())

    def has_binary(self, pred, d, e) -> bool:
        return (d, e) in self.binary.get(pred, ())

    def holds_atom(self, atom: Atom, h: dict) -> bool:
        if len(atom.args) == 1:
            return self.has_unary(atom.pred, h[atom.args[0]])
        return self.has_binary(atom.pred, h[atom.args[0]], h[atom.args[1]])

    def successors(self, role: Role, d):
        pairs = self.binary.get(role.name, ())
        if role.inv:
            return [a for (a, b) in pairs if b == d]
        return [b for (a, b) in pairs if a == d]

    def extension(self, c: Concept) -> set:
        """Set of domain elements satisfying ``c``."""
        op = c.op
        dom = self.domain
        if op == "top":
            return set(dom)
        if op == "bot":
            return set()
        if op == "name":
            return set(self.unary.get(c.name, ())) & set(dom)
        if op == "not":
            return set(dom) - self.extension(c.args[0])
        if op == "and":
            r = set(dom)
            for a in c.args:
                r &= self.extension(a)
            return r
        if op == "or":
            r = set()
            for a in c.args:
                r |= self.extension(a)
            return r
        if op in ("ex", "all"):
            inner = self.extension(c.args[0])
            if op == "ex":
                return {d for d in dom if any(e in inner for e in self.successors(c.role, d))}
            return {d for d in dom if all(e in inner for e in self.successors(c.role, d))}
        if op == "eqex":
            names = c.args
            out = set()
            for d in dom:
                sig = tuple(self.has_unary(n, d) for n in names)
                if any(tuple(self.has_unary(n, e) for n in names) == sig
                       for e in self.successors(c.role, d)):
                    out.add(d)
            return out
        raise ValueError(op)

    def satisfies_ci(self, lhs: Concept, rhs: Concept) -> bool:
        return self.extension(lhs) <= self.extension(rhs)

    def holds(self, f: Formula, asg: dict) -> bool:
        """Evaluate a GF2 formula under a variable assignment."""
        op = f.op
        if op == "true":
            return True
        if op == "false":
            return False
        if op == "atom":
            if len(f.vars) == 1:
                return self.has_unary(f.pred, asg[f.vars[0]])
            return self.has_binary(f.pred, asg[f.vars[0]], asg[f.vars[1]])
        if op == "eq":
            return asg[f.vars[0]] == asg[f.vars[1]]
        if op == "not":
            return not self.holds(f.args[0], asg)
        if op == "and":
            return all(self.holds(a, asg) for a in f.args)
        if op == "or":
            return any(self.holds(a, asg) for a in f.args)
        guard, body = f.args
        is_all = op == "forall"
        for sub in self._assignments(f.vars, asg):
            if self.holds(guard, sub):
                ok = self.holds(body, sub)
                if is_all and not ok:
                    return False
                if not is_all and ok:
                    return True
        return is_all

    def _assignments(self, vs, asg):
        if not vs:
            yield asg
            return
        v, rest = vs[0], vs[1:]
        for d in self.domain:
            sub = dict(asg)
            sub[v] = d
            yield from self._assignments(rest, sub)

    def is_model(self, o: Ontology) -> bool:
        if o.dialect == "GF2":
            return all(self.holds(s, {}) for s in o.sentences)
        return all(self.satisfies_ci(l, r) for l, r in o.cis)

    def contains_database(self, db: Database) -> bool:
        for f in db.facts:
            if is_label(f.pred):
                continue
            if len(f.args) == 1:
                if not self.has_unary(f.pred, f.args[0]):
                    return False
            elif not self.has_binary(f.pred, *f.args):
                return False
        return True
