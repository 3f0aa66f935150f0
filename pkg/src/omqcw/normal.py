"""Normal forms, closure sets and syntactic translations."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .syntax import (BOT, TOP, Concept, Formula, Ontology, cname, conj, disj,
                     exists, fand, fatom, feq, fexists, fforall, fnot, forall, f_or,
                     free_vars, neg, FALSE, TRUE, formula_preds)


def expand_alc_eq(c: Concept) -> Concept:
    """Rewrite every <r>.[A1..An]= into plain ALC: one disjunct per sign vector."""
    op = c.op
    if op == "eqex":
        names = c.args
        if not names:
            return exists(c.role, TOP)
        ds = []
        for signs in product((True, False), repeat=len(names)):
            lits = [cname(a) if s else neg(cname(a)) for a, s in zip(names, signs)]
            ds.append(conj(conj(*lits), exists(c.role, conj(*lits))))
        return disj(*ds)
    if op in ("top", "bot", "name"):
        return c
    return c._replace(args=tuple(expand_alc_eq(a) for a in c.args))


def nnf(c: Concept) -> Concept:
    """Negation normal form; ALC= constructors are expanded first."""
    return _nnf(c, False)


def _nnf(c: Concept, negated: bool) -> Concept:
    op = c.op
    if op == "not":
        return _nnf(c.args[0], not negated)
    if op == "top":
        return BOT if negated else TOP
    if op == "bot":
        return TOP if negated else BOT
    if op == "name":
        return neg(c) if negated else c
    if op == "and":
        parts = [_nnf(a, negated) for a in c.args]
        return disj(*parts) if negated else conj(*parts)
    if op == "or":
        parts = [_nnf(a, negated) for a in c.args]
        return conj(*parts) if negated else disj(*parts)
    if op == "ex":
        inner = _nnf(c.args[0], negated)
        return forall(c.role, inner) if negated else exists(c.role, inner)
    if op == "all":
        inner = _nnf(c.args[0], negated)
        return exists(c.role, inner) if negated else forall(c.role, inner)
    if op == "eqex":
        return _nnf(expand_alc_eq(c), negated)
    raise ValueError(op)


def is_nnf(c: Concept) -> bool:
    if c.op == "not":
        return c.args[0].op == "name"
    if c.op == "eqex":
        return False
    return all(is_nnf(a) for a in c.args)


def normalize_ontology(o: Ontology) -> Ontology:
    """{C1 <= D1, ...} becomes {top <= C_O} with C_O the NNF conjunction of ~Ci | Di."""
    if o.dialect == "GF2":
        raise ValueError("normalize_ontology expects an ALC/ALCI ontology")
    parts = [nnf(disj(neg(l), r)) for l, r in o.cis]
    if not parts:
        body = TOP
    elif len(parts) == 1:
        body = parts[0]
    else:
        body = Concept("and", tuple(parts))
    return Ontology(o.dialect, [(TOP, body)])


def ontology_concept(o: Ontology) -> Concept:
    """C_O of an ontology (normalizing first if needed)."""
    if len(o.cis) == 1 and o.cis[0][0] == TOP and is_nnf(o.cis[0][1]):
        return o.cis[0][1]
    return normalize_ontology(o).cis[0][1]


def subconcepts(c: Concept, acc: list | None = None, seen: set | None = None) -> list:
    """Subconcepts in a deterministic (post-order) sequence."""
    acc = [] if acc is None else acc
    seen = set() if seen is None else seen
    stack = [(c, False)]
    while stack:
        x, done = stack.pop()
        if x in seen:
            continue
        if done:
            seen.add(x)
            acc.append(x)
            continue
        stack.append((x, True))
        if x.op != "eqex":
            for a in reversed(x.args):
                if a not in seen:
                    stack.append((a, False))
    return acc


@dataclass(frozen=True)
class ClosureSets:
    sub: tuple
    cl: tuple
    cl_all: tuple
    cl_star: tuple


@dataclass(frozen=True)
class Gf2Closure:
    cl0: tuple
    cl1: tuple
    cl2: tuple


def closures(o: Ontology, db_roles=()):
    if o.dialect == "GF2":
        return gf2_closures(o, db_roles)
    co = ontology_concept(o)
    sub = subconcepts(co)
    # for NNF input the subconcepts of nnf(~C) are negations of subconcepts of C,
    # so one pass suffices
    out, seen = [], set()
    for c in sub:
        for x in (c, nnf(neg(c))):
            if x not in seen:
                seen.add(x)
                out.append(x)
    cl_all = tuple(c for c in out if c.op == "all")
    star, s3 = [], set()
    for c in cl_all:
        if c.args[0] not in s3:
            s3.add(c.args[0])
            star.append(c.args[0])
    return ClosureSets(tuple(sub), tuple(out), cl_all, tuple(star))


def _subformulas(f: Formula, acc: list, seen: set):
    stack = [f]
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        acc.append(x)
        stack.extend(x.args)


def _negate_simple(f: Formula) -> Formula:
    return f.args[0] if f.op == "not" else fnot(f)


def gf2_closures(o: Ontology, db_roles=()) -> Gf2Closure:
    subs, seen = [], set()
    for s in o.sentences:
        _subformulas(s, subs, seen)
    roles = {p for s in o.sentences for p, a in formula_preds(s).items() if a == 2}
    roles |= set(db_roles)
    extra = []
    for r in sorted(roles):
        extra += [fatom(r, "x", "y"), fatom(r, "y", "x")]
    cl0, cl1, cl2, s = [], [], [], set()
    for f in subs + extra:
        for g in (f, _negate_simple(f)):
            if g in s or g.op in ("true", "false"):
                continue
            s.add(g)
            n = len(free_vars(g))
            if n == 0:
                cl0.append(g)
            if n <= 1:
                cl1.append(g)
            cl2.append(g)
    return Gf2Closure(tuple(cl0), tuple(cl1), tuple(cl2))


# ---------------------------------------------------------------- ALCI -> GF2

def standard_translation(c: Concept, var: str = "x") -> Formula:
    other = "y" if var == "x" else "x"
    op = c.op
    if op == "top":
        return TRUE
    if op == "bot":
        return FALSE
    if op == "name":
        return fatom(c.name, var)
    if op == "not":
        return fnot(standard_translation(c.args[0], var))
    if op == "and":
        return fand(*[standard_translation(a, var) for a in c.args])
    if op == "or":
        return f_or(*[standard_translation(a, var) for a in c.args])
    if op in ("ex", "all"):
        r = c.role
        guard = fatom(r.name, other, var) if r.inv else fatom(r.name, var, other)
        body = standard_translation(c.args[0], other)
        if op == "ex":
            return fexists((other,), guard, body)
        return fforall((other,), guard, body)
    if op == "eqex":
        return standard_translation(expand_alc_eq(c), var)
    raise ValueError(op)


def ci_sentence(lhs: Concept, rhs: Concept) -> Formula:
    return fforall(("x",), feq("x", "x"), standard_translation(nnf(disj(neg(lhs), rhs)), "x"))


def alci_to_gf2(o: Ontology) -> Ontology:
    if o.dialect == "GF2":
        return o
    return Ontology("GF2", sentences=[ci_sentence(l, r) for l, r in o.cis])


def has_existential(o: Ontology) -> bool:
    """Whether the NNF of the ontology contains an existential restriction."""
    if o.dialect == "GF2":
        return any(_gf_has_exists(s, False) for s in o.sentences)
    return any(c.op == "ex" for c in subconcepts(ontology_concept(o)))


def _gf_has_exists(f: Formula, negated: bool) -> bool:
    op = f.op
    if op == "not":
        return _gf_has_exists(f.args[0], not negated)
    if op in ("and", "or"):
        return any(_gf_has_exists(a, negated) for a in f.args)
    if op in ("forall", "exists"):
        if (op == "exists") != negated:
            return True
        return _gf_has_exists(f.args[1], negated)
    return False
