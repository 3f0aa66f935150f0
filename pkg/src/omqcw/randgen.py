"""Seeded random instances for the differential and oracle suites."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .kexpr import kexpr_for_database
from .normal import closures, normalize_ontology
from .syntax import (BOT, CQ, TOP, UCQ, Atom, Concept, Database, Ontology, Role, cname, conj,
                     disj, exists, fand, fatom, feq, fexists, fforall, fnot, f_or, forall, neg)

NAMES = ("A", "B", "C")
ROLES = ("r", "s")


def random_concept(rng: random.Random, depth: int, names=NAMES, roles=ROLES, inverse=True) -> Concept:
    if depth <= 0 or rng.random() < 0.3:
        x = rng.random()
        if x < 0.06:
            return TOP
        if x < 0.1:
            return BOT
        c = cname(rng.choice(names))
        return neg(c) if rng.random() < 0.3 else c
    op = rng.choice(("and", "or", "ex", "ex", "all", "not"))
    if op == "not":
        return neg(random_concept(rng, depth - 1, names, roles, inverse))
    if op in ("and", "or"):
        a = random_concept(rng, depth - 1, names, roles, inverse)
        b = random_concept(rng, depth - 1, names, roles, inverse)
        return conj(a, b) if op == "and" else disj(a, b)
    role = Role(rng.choice(roles), inverse and rng.random() < 0.35)
    inner = random_concept(rng, depth - 1, names, roles, inverse)
    return exists(role, inner) if op == "ex" else forall(role, inner)


def cl_size(o: Ontology) -> int:
    return len(closures(normalize_ontology(o)).cl)


def random_ontology(rng: random.Random, max_cl=10, n_cis=(1, 2), depth=2, inverse=True,
                    names=NAMES, roles=ROLES) -> Ontology:
    """Random ALC/ALCI ontology whose closure has at most ``max_cl`` members (size filter only)."""
    while True:
        n = rng.randint(*n_cis)
        cis = []
        for _ in range(n):
            lhs = random_concept(rng, depth - 1, names, roles, inverse)
            rhs = random_concept(rng, depth, names, roles, inverse)
            cis.append((lhs, rhs))
        o = Ontology("ALCI" if inverse else "ALC", cis)
        if cl_size(o) <= max_cl:
            return o


def random_database(rng: random.Random, n_consts: int, names=NAMES, roles=ROLES, p_unary=0.35,
                    p_edge=0.3, p_loop=0.08, connected=False) -> Database:
    consts = ["c%d" % i for i in range(n_consts)]
    facts = []
    for c in consts:
        for a in names:
            if rng.random() < p_unary:
                facts.append(Atom(a, (c,)))
        for r in roles:
            if rng.random() < p_loop:
                facts.append(Atom(r, (c, c)))
    for i, a in enumerate(consts):
        for b in consts:
            if a != b:
                for r in roles:
                    if rng.random() < p_edge / len(roles):
                        facts.append(Atom(r, (a, b)))
    if connected:
        for i in range(1, n_consts):
            j = rng.randrange(i)
            if not any(len(f.args) == 2 and set(f.args) == {consts[i], consts[j]} for f in facts):
                r = rng.choice(roles)
                facts.append(Atom(r, (consts[i], consts[j]) if rng.random() < 0.5 else (consts[j], consts[i])))
    # every constant must occur in some fact
    present = {x for f in facts for x in f.args}
    for c in consts:
        if c not in present:
            facts.append(Atom(rng.choice(names), (c,)))
    return Database(facts)


def random_cq(rng: random.Random, max_atoms=4, max_vars=3, names=NAMES, roles=ROLES,
              p_unary=0.4) -> CQ:
    n_atoms = rng.randint(1, max_atoms)
    n_vars = rng.randint(1, max_vars)
    vs = ["x", "y", "z", "u", "w"][:n_vars]
    atoms = set()
    for _ in range(n_atoms):
        if len(vs) == 1 or rng.random() < p_unary:
            atoms.add(Atom(rng.choice(names), (rng.choice(vs),)))
        else:
            a, b = rng.sample(vs, 2) if rng.random() < 0.9 else (rng.choice(vs),) * 2
            atoms.add(Atom(rng.choice(roles), (a, b)))
    return CQ(frozenset(atoms))


def random_ucq(rng: random.Random, max_atoms=4, max_cqs=2, **kw) -> UCQ:
    """Boolean UCQ with at most ``max_atoms`` atoms in total."""
    n = rng.randint(1, max_cqs)
    cqs = []
    budget = max_atoms
    for i in range(n):
        if budget <= 0:
            break
        cq = random_cq(rng, max_atoms=max(1, budget if i == n - 1 else max(1, budget - (n - 1 - i))), **kw)
        budget -= len(cq.atoms)
        cqs.append(cq)
    return UCQ(tuple(cqs))


# ---------------------------------------------------------------- GF2

def _rand_atom1(rng, var, names):
    return fatom(rng.choice(names), var)


def _rand_body(rng, depth, free, names, roles):
    """Random formula over the free variables ``free`` (a subset of x, y)."""
    if depth <= 0 or rng.random() < 0.35:
        v = rng.choice(sorted(free))
        if len(free) == 2 and rng.random() < 0.4:
            a, b = ("x", "y") if rng.random() < 0.5 else ("y", "x")
            f = fatom(rng.choice(roles), a, b)
        elif rng.random() < 0.15:
            f = fatom(rng.choice(roles), v, v)
        else:
            f = _rand_atom1(rng, v, names)
        return fnot(f) if rng.random() < 0.3 else f
    op = rng.choice(("and", "or", "q", "q"))
    if op in ("and", "or"):
        a = _rand_body(rng, depth - 1, free, names, roles)
        b = _rand_body(rng, depth - 1, free, names, roles)
        return fand(a, b) if op == "and" else f_or(a, b)
    v = rng.choice(sorted(free))
    other = "y" if v == "x" else "x"
    g = fatom(rng.choice(roles), v, other) if rng.random() < 0.5 else fatom(rng.choice(roles), other, v)
    body = _rand_body(rng, depth - 1, {"x", "y"}, names, roles)
    if rng.random() < 0.5:
        return fexists((other,), g, body)
    return fforall((other,), g, body)


def random_gf2_ontology(rng: random.Random, n_sent=(1, 2), depth=2, names=NAMES, roles=ROLES,
                        max_size=40) -> Ontology:
    while True:
        sents = []
        for _ in range(rng.randint(*n_sent)):
            kind = rng.random()
            if kind < 0.55:
                s = fforall(("x",), feq("x", "x"), _rand_body(rng, depth, {"x"}, names, roles))
            elif kind < 0.85:
                g = fatom(rng.choice(roles), "x", "y")
                s = fforall(("x", "y"), g, _rand_body(rng, depth - 1, {"x", "y"}, names, roles))
            else:
                s = fexists(("x",), feq("x", "x"), _rand_body(rng, depth - 1, {"x"}, names, roles))
            sents.append(s)
        o = Ontology("GF2", sentences=sents)
        if o.size() <= max_size:
            return o


@dataclass
class Instance:
    ontology: Ontology
    db: Database
    query: UCQ | None = None
    aq: tuple | None = None    # (pred, const)
    kexpr: object = None
    seed: int = 0


def aq_instance(seed: int, max_adom=5, max_cl=10, gf2=False) -> Instance:
    rng = random.Random(seed)
    o = random_gf2_ontology(rng) if gf2 else random_ontology(rng, max_cl=max_cl)
    db = random_database(rng, rng.randint(1, max_adom))
    c = rng.choice(sorted(db.adom))
    a = rng.choice(NAMES)
    order = sorted(db.adom)
    rng.shuffle(order)
    return Instance(o, db, aq=(a, c), kexpr=kexpr_for_database(db, order), seed=seed)


def ucq_instance(seed: int, max_adom=4, max_atoms=4, max_cl=10, gf2=False) -> Instance:
    rng = random.Random(seed)
    o = random_gf2_ontology(rng) if gf2 else random_ontology(rng, max_cl=max_cl, n_cis=(1, 1))
    db = random_database(rng, rng.randint(1, max_adom))
    q = random_ucq(rng, max_atoms=max_atoms)
    order = sorted(db.adom)
    rng.shuffle(order)
    return Instance(o, db, query=q, kexpr=kexpr_for_database(db, order), seed=seed)
