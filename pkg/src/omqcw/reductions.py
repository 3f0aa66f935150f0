"""List-Coloring instances and their encodings as OMQ evaluation problems.

Two encodings are provided: a GF2 ontology with an atomic query over a database
of cliquewidth 2, and an ALC ontology with a Boolean CQ over a database of
cliquewidth 3. In both, the coloring instance is solvable iff the query is
not entailed. The ontologies grow with the number of color bits only.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .errors import ValidationError
from .kexpr import AddRole, Intro, KExpr, Relabel, Union, eval_kexpr, gen_two_cliques, union_all
from .oracle import ListColoring, listcol_solve
from .syntax import (BOT, CQ, TOP, UCQ, Atom, Database, Ontology, Role, cname, conj, disj, f_or,
                     fand, fatom, feq, fforall, fiff, fimp, fnot, forall)


def color_bits(k: int) -> int:
    """Number of color bits; at least one, so that a single color still has a complement."""
    return max(1, math.ceil(math.log2(k))) if k > 1 else 1


def bit_of(color: int, i: int) -> int:
    """Bit i (1-based, least significant first) of a color in 1..2^l."""
    return ((color - 1) >> (i - 1)) & 1


def bit_name(i: int, j: int) -> str:
    return "A%d_%d" % (i, j)


@dataclass
class Encoded:
    ontology: Ontology
    db: Database
    kexpr: KExpr
    query: object          # AQ as (pred, const) or a Boolean UCQ
    candidate: tuple
    colorable: bool        # ground truth from the List-Coloring solver
    bits: int

    @property
    def entailed_expected(self) -> bool:
        return not self.colorable


def _graph_vertices(s: KExpr):
    out = []
    stack = [s]
    while stack:
        n = stack.pop()
        if isinstance(n, Intro):
            out.append(n.const)
        else:
            stack.extend(n.children)
    return out


def _check_graph(inst: ListColoring, s: KExpr, role: str):
    db = eval_kexpr(s, with_labels=False)
    got = {tuple(f.args) for f in db.facts if f.pred == role}
    want = set()
    for u, v in inst.edges:
        want.add((u, v))
        want.add((v, u))
    if got != want or set(_graph_vertices(s)) != set(inst.vertices):
        raise ValidationError("the expression does not generate the coloring graph")


def _map_expression(s: KExpr, graph_role: str, leaf, role: str) -> KExpr:
    """Rebuild s bottom-up: leaves via ``leaf``, graph edges become ``role`` in both directions."""
    memo = {}
    stack = [(s, False)]
    while stack:
        n, done = stack.pop()
        if id(n) in memo:
            continue
        if not done:
            stack.append((n, True))
            stack.extend((c, False) for c in n.children)
            continue
        if isinstance(n, Intro):
            memo[id(n)] = leaf(n.label, n.const)
        elif isinstance(n, Union):
            memo[id(n)] = Union(memo[id(n.left)], memo[id(n.right)])
        elif isinstance(n, AddRole):
            ch = memo[id(n.child)]
            if n.role == graph_role:
                memo[id(n)] = AddRole(role, n.dst, n.src, AddRole(role, n.src, n.dst, ch))
            else:
                memo[id(n)] = AddRole(n.role, n.src, n.dst, ch)
        else:
            memo[id(n)] = Relabel(n.src, n.dst, memo[id(n.child)])
    return memo[id(s)]


def _color_facts(const: str, color: int, bits: int):
    return [Atom(bit_name(i, bit_of(color, i)), (const,)) for i in range(1, bits + 1)]


# ================================================================ GF2, atomic query

def gf2_coloring_ontology(bits: int) -> Ontology:
    sents = []
    for i in range(1, bits + 1):
        sents.append(fforall(("x",), feq("x", "x"),
                             fiff(fatom(bit_name(i, 0), "x"), fnot(fatom(bit_name(i, 1), "x")))))
    same = fand(*[fiff(fatom(bit_name(i, 0), "x"), fatom(bit_name(i, 0), "y"))
                  for i in range(1, bits + 1)])
    sents.append(fforall(("x", "y"), fatom("s", "x", "y"), fimp(same, fatom("D", "x"))))
    sents.append(fforall(("x", "y"), fatom("r", "x", "y"),
                         fimp(fand(fatom("B", "x"), fatom("B", "y"), same), fatom("D", "x"))))
    # the defect marker spreads along both roles; one sentence per guard
    for role in ("r", "s"):
        sents.append(fforall(("x", "y"), fatom(role, "x", "y"),
                             fimp(f_or(fatom("D", "x"), fatom("D", "y")),
                                  fand(fatom("D", "x"), fatom("D", "y")))))
    return Ontology("GF2", sentences=sents)


def gen_listcol_gf2(inst: ListColoring, s: KExpr, graph_role="edge") -> Encoded:
    """GF2 encoding with query D(a); the coloring exists iff D(a) is not entailed."""
    if not inst.is_connected():
        raise ValidationError("the coloring graph must be connected")
    _check_graph(inst, s, graph_role)
    inst = inst.normalized()
    bits = color_bits(inst.k)
    palette = range(1, 2 ** bits + 1)
    extra = {v: [c for c in palette if c not in inst.lists[v]] for v in inst.vertices}

    def pre(v, c):
        return "%s_c%d" % (v, c)

    def leaf(label, v):
        other = 3 - label
        core = Intro(label, v, [Atom("B", (v,))])
        if not extra[v]:
            return core
        pres = union_all([Intro(other, pre(v, c), _color_facts(pre(v, c), c, bits)) for c in extra[v]])
        return Relabel(other, label, AddRole("s", label, other, Union(core, pres)))

    expr = _map_expression(s, graph_role, leaf, "r")
    facts = []
    for v in inst.vertices:
        facts.append(Atom("B", (v,)))
        for c in extra[v]:
            facts.append(Atom("s", (v, pre(v, c))))
            facts += _color_facts(pre(v, c), c, bits)
    for u, v in inst.edges:
        for x in [u] + [pre(u, c) for c in extra[u]]:
            for y in [v] + [pre(v, c) for c in extra[v]]:
                facts += [Atom("r", (x, y)), Atom("r", (y, x))]
    db = Database(facts)
    a = inst.vertices[0]
    return Encoded(gf2_coloring_ontology(bits), db, expr, ("D", a), (a,),
                   listcol_solve(inst), bits)


# ================================================================ ALC, conjunctive query

def alc_coloring_ontology(bits: int) -> Ontology:
    cis = []
    for i in range(1, bits + 1):
        a0, a1 = cname(bit_name(i, 0)), cname(bit_name(i, 1))
        cis.append((TOP, disj(a0, a1)))
        cis.append((conj(a0, a1), BOT))
    cis.append((conj(cname("A"), cname("B")), BOT))
    for i in range(1, bits + 1):
        for j in (0, 1):
            cis.append((conj(cname("B"), cname(bit_name(i, j))),
                        forall(Role("r"), disj(cname("B"), cname(bit_name(i, 1 - j))))))
    return Ontology("ALC", cis)


def defect_query(bits: int) -> UCQ:
    atoms = {Atom("r", ("x", "x")), Atom("r", ("y", "y")), Atom("B", ("x",)), Atom("B", ("y",))}
    for i in range(1, bits + 1):
        z = ["z%d_%d" % (n, i) for n in range(1, 7)]
        atoms |= {Atom("r", ("x", z[0])), Atom("r", (z[0], z[1])), Atom("r", (z[1], z[2])),
                  Atom("r", (z[2], "y"))}
        atoms |= {Atom("r", ("x", z[3])), Atom("r", (z[3], z[4])), Atom("r", (z[4], z[5])),
                  Atom("r", (z[5], "y"))}
        atoms |= {Atom(bit_name(i, 0), (z[0],)), Atom("A", (z[1],)), Atom(bit_name(i, 1), (z[2],)),
                  Atom(bit_name(i, 1), (z[3],)), Atom("A", (z[4],)), Atom(bit_name(i, 0), (z[5],))}
    return UCQ((CQ(frozenset(atoms)),))


def gen_listcol_alc_cq(inst: ListColoring, s: KExpr | None = None, graph_role="edge") -> Encoded:
    """ALC encoding with a Boolean defect CQ; the coloring exists iff the CQ is not entailed.

    When a 2-expression for the graph is given, a 3-expression for the
    database is built from it.
    """
    if not inst.is_connected():
        raise ValidationError("the coloring graph must be connected")
    inst = inst.normalized()
    bits = color_bits(inst.k)
    palette = range(1, 2 ** bits + 1)
    extra = {v: [c for c in palette if c not in inst.lists[v]] for v in inst.vertices}

    def pre(v, c):
        return "%s_c%d" % (v, c)

    def copy(x):
        return "%s_b" % x

    facts = []
    for u, v in inst.edges:
        facts += [Atom("r", (u, v)), Atom("r", (v, u))]
    for v in inst.vertices:
        nodes = [v] + [pre(v, c) for c in extra[v]]
        for c in extra[v]:
            facts += [Atom("r", (v, pre(v, c))), Atom("r", (pre(v, c), v))]
            facts += _color_facts(pre(v, c), c, bits)
        for x in nodes:
            b = copy(x)
            facts += [Atom("r", (x, b)), Atom("r", (b, x)), Atom("r", (b, b)),
                      Atom("A", (x,)), Atom("B", (b,))]
    db = Database(facts)

    expr = None
    if s is not None:
        _check_graph(inst, s, graph_role)

        def with_copy(label, x, own):
            # x on label, its copy on the spare label, joined, copy parked on 3
            other = 3 - label
            b = copy(x)
            u = Union(Intro(label, x, own + [Atom("A", (x,))]),
                      Intro(other, b, [Atom("B", (b,)), Atom("r", (b, b))]))
            return Relabel(other, 3, AddRole("r", other, label, AddRole("r", label, other, u)))

        def leaf(label, v):
            other = 3 - label
            core = with_copy(label, v, [])
            for c in extra[v]:
                x = pre(v, c)
                part = Relabel(label, other, with_copy(label, x, _color_facts(x, c, bits)))
                core = Relabel(other, 3, AddRole("r", other, label,
                                                 AddRole("r", label, other, Union(core, part))))
            return core

        expr = _map_expression(s, graph_role, leaf, "r")
    return Encoded(alc_coloring_ontology(bits), db, expr, defect_query(bits), (),
                   listcol_solve(inst), bits)


# ================================================================ random instances

def random_listcol(rng: random.Random, max_vertices=8, max_colors=8):
    """Connected union of two cliques with random lists, plus its 2-expression."""
    while True:
        n = rng.randint(1, max(1, max_vertices - 1))
        m = rng.randint(0, max_vertices - n)
        overlap = rng.randint(1, min(n, m)) if m else 0
        if n + m - overlap < 1 or n + m - overlap > max_vertices:
            continue
        db, expr = gen_two_cliques(n, m, overlap)
        verts = tuple(sorted(db.adom))
        edges = tuple(sorted({tuple(sorted(f.args)) for f in db.facts if f.pred == "edge"}))
        k = rng.randint(1, max_colors)
        lists = {v: frozenset(rng.sample(range(1, k + 1), rng.randint(1, k))) for v in verts}
        inst = ListColoring(verts, edges, lists)
        if inst.is_connected():
            return inst, expr
