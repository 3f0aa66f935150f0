"""Brute-force ground truth: a finite-model oracle over a bounded domain (SAT based)
and a List-Coloring solver.

The oracle grounds the ontology, the database and the negated query over
adom(D) plus up to ``extra`` anonymous elements and asks a SAT solver for a
model. Concepts and formulas are grounded directly from their own semantics; no
translation shared with the dynamic programs is used.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from pysat.solvers import Solver

from .errors import BudgetError
from .syntax import (TOP_PRED, Concept, Database, Formula, Interpretation, Ontology, UCQ,
                     concept_names, concept_roles, formula_preds, is_label)

SOLVER = "cadical153"
MAX_CLAUSES = 4_000_000


class Grounder:
    """Tseitin grounding over a fixed finite domain with optional elements.

    Domain elements ``0..n_fixed-1`` always exist; the remaining ``extra`` may be absent.
    """

    def __init__(self, n_fixed: int, extra: int):
        self.n = n_fixed + extra
        self.n_fixed = n_fixed
        self.clauses = []
        self.nvars = 0
        self._atoms = {}
        self._cache = {}
        self.present = [self.new() for _ in range(self.n)]
        for e in range(n_fixed):
            self.clauses.append([self.present[e]])
        # anonymous elements are used in order, which removes symmetric copies
        for e in range(n_fixed + 1, self.n):
            self.clauses.append([-self.present[e], self.present[e - 1]])
        self.true = self.new()
        self.clauses.append([self.true])

    def new(self) -> int:
        self.nvars += 1
        return self.nvars

    def add(self, clause):
        self.clauses.append(clause)
        if len(self.clauses) > MAX_CLAUSES:
            raise BudgetError("grounding exceeds %d clauses" % MAX_CLAUSES)

    def atom(self, pred: str, args: tuple) -> int:
        if pred == TOP_PRED and len(args) == 1:
            return self.present[args[0]]
        key = (pred, args)
        v = self._atoms.get(key)
        if v is None:
            v = self._atoms[key] = self.new()
            for e in set(args):
                if e >= self.n_fixed:
                    self.add([-v, self.present[e]])
        return v

    def gate_and(self, lits) -> int:
        lits = [l for l in lits if l != self.true]
        if any(l == -self.true for l in lits):
            return -self.true
        if not lits:
            return self.true
        if len(lits) == 1:
            return lits[0]
        key = ("and", tuple(sorted(set(lits))))
        v = self._cache.get(key)
        if v is not None:
            return v
        v = self._cache[key] = self.new()
        for l in lits:
            self.add([-v, l])
        self.add([v] + [-l for l in lits])
        return v

    def gate_or(self, lits) -> int:
        return -self.gate_and([-l for l in lits])

    # ---- concepts

    def concept(self, c: Concept, d: int) -> int:
        key = (c, d)
        v = self._cache.get(key)
        if v is not None:
            return v
        op = c.op
        if op == "top":
            v = self.true
        elif op == "bot":
            v = -self.true
        elif op == "name":
            v = self.atom(c.name, (d,))
        elif op == "not":
            v = -self.concept(c.args[0], d)
        elif op == "and":
            v = self.gate_and([self.concept(a, d) for a in c.args])
        elif op == "or":
            v = self.gate_or([self.concept(a, d) for a in c.args])
        elif op in ("ex", "all"):
            r = c.role
            parts = []
            for e in range(self.n):
                edge = self.atom(r.name, (e, d) if r.inv else (d, e))
                inner = self.concept(c.args[0], e)
                if op == "ex":
                    parts.append(self.gate_and([edge, inner]))
                else:
                    parts.append(self.gate_or([-edge, inner]))
            v = self.gate_or(parts) if op == "ex" else self.gate_and(parts)
        elif op == "eqex":
            r = c.role
            parts = []
            for e in range(self.n):
                edge = self.atom(r.name, (e, d) if r.inv else (d, e))
                same = []
                for a in c.args:
                    x, y = self.atom(a, (d,)), self.atom(a, (e,))
                    same.append(self.gate_or([self.gate_and([x, y]), self.gate_and([-x, -y])]))
                parts.append(self.gate_and([edge] + same))
            v = self.gate_or(parts)
        else:
            raise ValueError(op)
        self._cache[key] = v
        return v

    # ---- formulas

    def formula(self, f: Formula, asg: tuple) -> int:
        """``asg`` is a tuple of (variable, element) pairs, sorted."""
        key = (f, asg)
        v = self._cache.get(key)
        if v is not None:
            return v
        env = dict(asg)
        op = f.op
        if op == "true":
            v = self.true
        elif op == "false":
            v = -self.true
        elif op == "atom":
            v = self.atom(f.pred, tuple(env[x] for x in f.vars))
        elif op == "eq":
            a, b = env[f.vars[0]], env[f.vars[1]]
            v = self.present[a] if a == b else -self.true
        elif op == "not":
            v = -self.formula(f.args[0], asg)
        elif op == "and":
            v = self.gate_and([self.formula(a, asg) for a in f.args])
        elif op == "or":
            v = self.gate_or([self.formula(a, asg) for a in f.args])
        else:
            guard, body = f.args
            parts = []
            for els in product(range(self.n), repeat=len(f.vars)):
                e2 = dict(env)
                e2.update(zip(f.vars, els))
                sub = tuple(sorted(e2.items()))
                g = self.formula(guard, sub)
                b = self.formula(body, sub)
                pres = [self.present[e] for e in els]
                if op == "forall":
                    parts.append(self.gate_or([-g, b] + [-p for p in pres]))
                else:
                    parts.append(self.gate_and([g, b] + pres))
            v = self.gate_and(parts) if op == "forall" else self.gate_or(parts)
        self._cache[key] = v
        return v

    # ---- top level

    def assert_ontology(self, o: Ontology):
        for lhs, rhs in o.cis:
            for d in range(self.n):
                self.add([-self.present[d], -self.concept(lhs, d), self.concept(rhs, d)])
        for s in o.sentences:
            self.add([self.formula(s, ())])

    def solve(self, assumptions=()):
        with Solver(name=SOLVER, bootstrap_with=self.clauses) as s:
            ok = s.solve(assumptions=list(assumptions))
            model = s.get_model() if ok else None
        return ok, model


@dataclass
class OracleResult:
    entailed: bool
    countermodel: Interpretation | None = None
    domain_size: int = 0

    @property
    def verdict(self):
        return "entailed" if self.entailed else "countermodel-found"


def _prepare(o: Ontology, db: Database, extra: int):
    consts = sorted(db.adom)
    idx = {c: i for i, c in enumerate(consts)}
    g = Grounder(len(consts), extra)
    g.assert_ontology(o)
    for f in db.facts:
        if is_label(f.pred):
            continue
        g.add([g.atom(f.pred, tuple(idx[a] for a in f.args))])
    return g, consts, idx


def _negate_query(g: Grounder, q: UCQ, cand_idx: tuple, n_elems: int):
    for cq in q.cqs:
        vs = sorted(cq.vars())
        ans = dict(zip(q.answer, cand_idx))
        free = [v for v in vs if v not in ans]
        for els in product(range(n_elems), repeat=len(free)):
            h = dict(ans)
            h.update(zip(free, els))
            g.add([-g.atom(a.pred, tuple(h[x] for x in a.args)) for a in cq.atoms])


def _decode(g: Grounder, model, consts):
    pos = set(l for l in model if l > 0)
    names = list(consts) + ["_e%d" % i for i in range(g.n - len(consts))]
    dom = [names[e] for e in range(g.n) if g.present[e] in pos]
    un, bi = {}, {}
    for (pred, args), v in g._atoms.items():
        if v in pos:
            if len(args) == 1:
                un.setdefault(pred, set()).add(names[args[0]])
            else:
                bi.setdefault(pred, set()).add((names[args[0]], names[args[1]]))
    return Interpretation(dom, un, bi)


def finite_model_oracle(o: Ontology, db: Database, q: UCQ | None, candidate=(), extra: int = 2,
                        want_model=False, adom_only=False) -> OracleResult:
    """Decide whether every model of (o, db) with at most |adom|+extra elements satisfies q(candidate).

    With q=None this is a satisfiability test: ``entailed`` is then True iff no model exists.
    With ``adom_only`` the query must be matched inside the database constants.
    """
    if len(db.adom) + extra > 10:
        raise BudgetError("oracle domain too large (%d elements)" % (len(db.adom) + extra))
    g, consts, idx = _prepare(o, db, extra)
    if q is not None:
        for c in candidate:
            if c not in idx:
                raise BudgetError("candidate constant %s not in the database" % c)
        _negate_query(g, q, tuple(idx[c] for c in candidate), len(consts) if adom_only else g.n)
    ok, model = g.solve()
    cm = _decode(g, model, consts) if ok and want_model else None
    return OracleResult(not ok, cm, g.n)


def oracle_sat(o: Ontology, db: Database, extra: int = 2) -> bool:
    return not finite_model_oracle(o, db, None, (), extra).entailed


def signature_of(o: Ontology, db: Database = None, q: UCQ = None):
    cn, rn = set(), set()
    for l, r in o.cis:
        concept_names(l, cn)
        concept_names(r, cn)
        concept_roles(l, rn)
        concept_roles(r, rn)
    for s in o.sentences:
        for p, a in formula_preds(s).items():
            (cn if a == 1 else rn).add(p)
    if db is not None:
        cn |= db.concept_names()
        rn |= db.role_names()
    if q is not None:
        for p, a in q.preds().items():
            if p != TOP_PRED:
                (cn if a == 1 else rn).add(p)
    return cn, rn


# ---------------------------------------------------------------- List-Coloring

@dataclass
class ListColoring:
    vertices: tuple
    edges: tuple
    lists: dict

    @property
    def colors(self):
        return sorted(set().union(*self.lists.values())) if self.lists else []

    @property
    def k(self):
        return len(self.colors)

    def normalized(self) -> "ListColoring":
        """Colors renumbered to 1..k."""
        ren = {c: i + 1 for i, c in enumerate(self.colors)}
        return ListColoring(self.vertices, self.edges,
                            {v: frozenset(ren[c] for c in cs) for v, cs in self.lists.items()})

    def is_connected(self):
        if not self.vertices:
            return False
        adj = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            u = stack.pop()
            for w in adj[u] - seen:
                seen.add(w)
                stack.append(w)
        return len(seen) == len(self.vertices)


def listcol_solve(inst: ListColoring) -> bool:
    """Whether a proper list coloring exists."""
    return listcol_coloring(inst) is not None


def listcol_coloring(inst: ListColoring):
    """Backtracking in degree order. Returns a coloring dict or None."""
    adj = {v: set() for v in inst.vertices}
    for u, v in inst.edges:
        if u == v:
            return None
        adj[u].add(v)
        adj[v].add(u)
    order = sorted(inst.vertices, key=lambda v: (-len(adj[v]), len(inst.lists[v]), str(v)))
    col = {}

    def rec(i):
        if i == len(order):
            return True
        v = order[i]
        for c in sorted(inst.lists[v]):
            if all(col.get(u) != c for u in adj[v]):
                col[v] = c
                if rec(i + 1):
                    return True
                del col[v]
        return False

    return dict(col) if rec(0) else None
