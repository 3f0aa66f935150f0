"""Cliquewidth dynamic programs for ALCI: IOAs for satisfiability and atomic queries,
decorated IOAs for UCQs.

An IOA is stored as a tuple ``(in_1, ..., in_k, out_1, ..., out_k)`` of bitmasks:
``in_i`` over the concepts C with some forall-restriction over C in the closure,
``out_i`` over the forall-restrictions of the closure.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .dp import DPStats, antichain, check_expression, fold, max_label
from .errors import ValidationError
from .kexpr import add_unary_to_leaf, kexpr_matches
from .normal import normalize_ontology
from .rewrite import RewriteBundle, booleanize, rewrite
from .syntax import UCQ, Atom, Database, Ontology, cname, is_label, neg
from .typesys import AlciTypes


class IoaSpace:
    """Bit-level helpers for IOAs over a type table."""

    def __init__(self, types: AlciTypes, k: int):
        self.T = types
        self.k = k
        cl_idx = types.idx
        self.star_pos = {cl_idx[c]: i for i, c in enumerate(types.cl_star)}
        self.all_pos = {cl_idx[c]: i for i, c in enumerate(types.cl_all)}
        self.full_in = (1 << len(types.cl_star)) - 1
        star_of = {c: i for i, c in enumerate(types.cl_star)}
        self.fwd = {}   # role name -> [(out bit, in bit)] for forall r.C
        self.bwd = {}   # role name -> [(out bit, in bit)] for forall r-.C
        for i, c in enumerate(types.cl_all):
            tgt = self.bwd if c.role.inv else self.fwd
            tgt.setdefault(c.role.name, []).append((i, star_of[c.args[0]]))
        self._need = {}
        self._proj = {}
        self.empty = tuple([self.full_in] * k + [0] * k)

    def project(self, t: int):
        """(in, out) masks of a single type."""
        v = self._proj.get(t)
        if v is None:
            i_m = o_m = 0
            for b, p in self.star_pos.items():
                if t >> b & 1:
                    i_m |= 1 << p
            for b, p in self.all_pos.items():
                if t >> b & 1:
                    o_m |= 1 << p
            v = self._proj[t] = (i_m, o_m)
        return v

    def need(self, table, role, out_mask):
        key = (id(table), role, out_mask)
        v = self._need.get(key)
        if v is None:
            v = 0
            for ob, ib in table.get(role, ()):
                if out_mask >> ob & 1:
                    v |= 1 << ib
            self._need[key] = v
        return v

    def leaf_ioa(self, t: int, label: int):
        i_m, o_m = self.project(t)
        v = list(self.empty)
        v[label - 1] = i_m
        v[self.k + label - 1] = o_m
        return tuple(v)

    def union(self, a, b):
        k = self.k
        return tuple([a[i] & b[i] for i in range(k)] + [a[i] | b[i] for i in range(k, 2 * k)])

    def edge_ok(self, g, role, i, j):
        k = self.k
        if self.need(self.fwd, role, g[k + i - 1]) & ~g[j - 1]:
            return False
        if self.need(self.bwd, role, g[k + j - 1]) & ~g[i - 1]:
            return False
        return True

    def relabel(self, g, i, j):
        k = self.k
        v = list(g)
        v[j - 1] &= g[i - 1]
        v[k + j - 1] |= g[k + i - 1]
        v[i - 1] = self.full_in
        v[k + i - 1] = 0
        return tuple(v)

    def forget(self, g, live):
        """Reset labels outside ``live`` to the neutral entry."""
        k = self.k
        v = list(g)
        for l in range(1, k + 1):
            if l not in live:
                v[l - 1] = self.full_in
                v[k + l - 1] = 0
        return tuple(v)

    def dominates(self, a, b):
        """a is at least as permissive as b: larger ins and smaller outs everywhere."""
        k = self.k
        for i in range(k):
            if b[i] & ~a[i] or a[k + i] & ~b[k + i]:
                return False
        return True


def _leaf_types(T: AlciTypes, node):
    facts = [f for f in node.facts if not is_label(f.pred)]
    return [t for t in T.types if T.realizes_leaf(t, facts, node.const)]


class _AqOps:
    def __init__(self, space: IoaSpace, prune: bool):
        self.sp = space
        self.prune = prune

    def _p(self, xs):
        xs = set(xs)
        if self.prune and len(xs) > 1:
            return set(antichain(sorted(xs), self.sp.dominates))
        return xs

    def leaf(self, node):
        return self._p(self.sp.leaf_ioa(t, node.label) for t in _leaf_types(self.sp.T, node))

    def union(self, a, b):
        return self._p(self.sp.union(x, y) for x in a for y in b)

    def add(self, a, role, i, j):
        return {g for g in a if self.sp.edge_ok(g, role, i, j)}

    def relabel(self, a, i, j):
        return self._p(self.sp.relabel(g, i, j) for g in a)

    def forget(self, a, live, node):
        if not self.prune:
            return a
        return self._p(self.sp.forget(g, live) for g in a)


def theta_aq(s, o: Ontology, types: AlciTypes | None = None, k=None, prune=False, stats=None):
    """Theta(s) over IOAs. With ``prune`` only maximally permissive IOAs are kept."""
    check_expression(s, k)
    T = types if types is not None else AlciTypes(normalize_ontology(o))
    space = IoaSpace(T, k or max_label(s))
    theta, st = fold(s, _AqOps(space, prune), stats, stop_on_empty=True)
    return theta, st


def _require_match(s, db):
    if db is not None and not kexpr_matches(s, db):
        raise ValidationError("the k-expression does not generate the database")


def sat_alci(o: Ontology, db: Database | None, s, stats=None) -> bool:
    _require_match(s, db)
    theta, _ = theta_aq(s, o, prune=True, stats=stats)
    return bool(theta)


def not_name(a: str) -> str:
    return "@not_" + a


def marker_ontology(o: Ontology, pred: str) -> Ontology:
    m = cname(not_name(pred))
    a = cname(pred)
    return Ontology("ALCI", list(o.cis) + [(m, neg(a)), (neg(a), m)])


def eval_aq_alci(o: Ontology, pred: str, const: str, db: Database | None, s, stats=None) -> bool:
    """Whether o, D entail pred(const)."""
    _require_match(s, db)
    if db is not None and const not in db.adom:
        raise ValidationError("constant %s is not in the database" % const)
    s2 = add_unary_to_leaf(s, const, [Atom(not_name(pred), (const,))])
    theta, _ = theta_aq(s2, marker_ontology(o, pred), prune=True, stats=stats)
    return not theta


# ---------------------------------------------------------------- decorated IOAs

class QueryIndex:
    """Atoms of the rewritten CQs, numbered for bitmask subqueries."""

    def __init__(self, qhat: UCQ):
        self.cqs = []
        for cq in qhat.cqs:
            atoms = sorted(cq.atoms)
            vs = sorted({v for a in atoms for v in a.args})
            vi = {v: i for i, v in enumerate(vs)}
            enc = [(a.pred, tuple(vi[x] for x in a.args)) for a in atoms]
            nbr = [0] * len(vs)
            for _, args in enc:
                for x in args:
                    for y in args:
                        if x != y:
                            nbr[x] |= 1 << y
            self.cqs.append({
                "nbr": nbr, "atoms": enc, "nvars": len(vs),
                "atom_vmask": [sum(1 << x for x in set(args)) for _, args in enc],
                "by_role": self._by_role(enc), "over": {},
                "components": _components(nbr),
            })

    @staticmethod
    def _by_role(enc):
        out = {}
        for b, (p, args) in enumerate(enc):
            if len(args) == 2 and args[0] != args[1]:
                out.setdefault(p, []).append((b, args[0], args[1]))
        return out

    def atoms_over(self, ci, vmask):
        c = self.cqs[ci]
        v = c["over"].get(vmask)
        if v is None:
            v = 0
            for b, am in enumerate(c["atom_vmask"]):
                if am & ~vmask == 0:
                    v |= 1 << b
            c["over"][vmask] = v
        return v


def _components(nbr):
    seen, out = 0, []
    for x in range(len(nbr)):
        if seen >> x & 1:
            continue
        comp, frontier = 1 << x, 1 << x
        while frontier:
            y = (frontier & -frontier).bit_length() - 1
            frontier &= frontier - 1
            new = nbr[y] & ~comp
            comp |= new
            frontier |= new
        seen |= comp
        out.append(comp)
    return frozenset(out)


DEAD = 255   # label of constants that can no longer receive role facts


def _vmask(f):
    m = 0
    for i, x in enumerate(f):
        if x:
            m |= 1 << i
    return m


class _UcqOps:
    """S-sets hold partial matches of query-connected variable sets only.

    A partial match of any variable set is a combination of partial matches of
    its connected pieces, so nothing is lost; pieces are merged when a role
    insertion adds an atom between them. Elements ``(cq, atom mask, labels)``
    are interned as integers so that per-element steps can be memoized.
    """

    def __init__(self, space: IoaSpace, qi: QueryIndex, prune: bool):
        self.sp = space
        self.qi = qi
        self.prune = prune
        self._leaf_cache = {}
        self._ids = {}
        self.elements = []      # id -> (cq, atom mask, labels)
        self._vms = []          # id -> variable mask
        self._full = []         # id -> (cq, component mask) if it fully matches a component
        self._viable_ids = {}
        self._with_atoms = {}   # (role, i, j) -> {id: id}
        self._merged = {}       # (role, i, j) -> {(id, id): id or -1}
        self._mapped = {}       # transform key -> {id: id or -1}
        self._closed = {}       # (role, i, j) -> S-sets already closed under that insertion

    def intern(self, e) -> int:
        i = self._ids.get(e)
        if i is None:
            i = self._ids[e] = len(self.elements)
            ci, mask, f = e
            vm = _vmask(f)
            self.elements.append(e)
            self._vms.append(vm)
            full = vm in self.qi.cqs[ci]["components"] and mask == self.qi.atoms_over(ci, vm)
            self._full.append((ci, vm) if full else None)
        return i

    # -- S-set helpers

    def _viable(self, e):
        """Every atom over the assigned variables that is missing can still be added later."""
        ci, mask, f = e
        c = self.qi.cqs[ci]
        vm = _vmask(f)
        # a variable on a dead constant cannot gain new neighbours
        nbr = c["nbr"]
        for x, lab in enumerate(f):
            if lab == DEAD and nbr[x] & ~vm:
                return False
        missing = self.qi.atoms_over(ci, vm) & ~mask
        b = 0
        while missing:
            if missing & 1:
                _, args = c["atoms"][b]
                if len(args) == 1 or args[0] == args[1]:
                    return False
                la, lb = f[args[0]], f[args[1]]
                if la == lb or la == DEAD or lb == DEAD:
                    return False
            missing >>= 1
            b += 1
        return True

    def _viable_id(self, e):
        """Interned id of e, or -1 when e can never be completed."""
        i = self._ids.get(e)
        if i is not None:
            return i
        v = self._viable_ids.get(e)
        if v is None:
            v = self._viable_ids[e] = self.intern(e) if self._viable(e) else -1
        return v

    def complete(self, S) -> bool:
        """Some CQ has, for each of its connected components, an element matching it fully."""
        done = set()
        full = self._full
        for i in S:
            if full[i] is not None:
                done.add(full[i])
        if not done:
            return False
        return any(c["components"] and all((ci, m) in done for m in c["components"])
                   for ci, c in enumerate(self.qi.cqs))

    def _finish(self, states):
        """Drop states that already contain a complete match; prune by dominance."""
        if not self.prune:
            return set(states)
        best = {}
        for g, S in states:
            if self.complete(S):
                continue
            lst = best.setdefault(g, [])
            if any(x <= S for x in lst):
                continue
            lst[:] = [x for x in lst if not S <= x]
            lst.append(S)
        flat = [(g, S) for g, lst in best.items() for S in lst]
        if 1 < len(flat) <= 3000 and len(best) > 1:
            dom = self.sp.dominates
            flat.sort(key=lambda x: (len(x[1]), x[0]))
            flat = antichain(flat, lambda a, b: a is not b and dom(a[0], b[0]) and a[1] <= b[1])
        return set(flat)

    # -- leaf

    def _leaf_S(self, t, label, unary, loops):
        key = (t, label, unary, loops)
        v = self._leaf_cache.get(key)
        if v is not None:
            return v
        T = self.sp.T
        out = set()
        for ci, c in enumerate(self.qi.cqs):
            n = c["nvars"]
            enc = c["atoms"]
            nbr = c["nbr"]

            def holds(b):
                p, args = enc[b]
                if len(args) == 1:
                    i = T.name_cl.get(p)
                    return bool(t >> i & 1) if i is not None else p in unary
                return p in loops

            ok_var = [all(holds(b) for b, am in enumerate(c["atom_vmask"]) if am == 1 << x)
                      for x in range(n)]
            # connected variable sets all of whose atoms hold at this constant
            seen = set()
            stack = [1 << x for x in range(n) if ok_var[x]]
            while stack:
                vm = stack.pop()
                if vm in seen:
                    continue
                seen.add(vm)
                f = tuple(label if vm >> x & 1 else 0 for x in range(n))
                out.add(self.intern((ci, self.qi.atoms_over(ci, vm), f)))
                ext = 0
                for x in range(n):
                    if vm >> x & 1:
                        ext |= nbr[x]
                ext &= ~vm
                while ext:
                    x = (ext & -ext).bit_length() - 1
                    ext &= ext - 1
                    nv = vm | (1 << x)
                    if not ok_var[x] or nv in seen:
                        continue
                    new_atoms = self.qi.atoms_over(ci, nv) & ~self.qi.atoms_over(ci, vm)
                    b, good, m = 0, True, new_atoms
                    while m:
                        if m & 1 and not holds(b):
                            good = False
                            break
                        m >>= 1
                        b += 1
                    if good:
                        stack.append(nv)
        v = self._leaf_cache[key] = frozenset(out)
        return v

    def leaf(self, node):
        facts = [f for f in node.facts if not is_label(f.pred)]
        unary = frozenset(f.pred for f in facts if len(f.args) == 1)
        loops = frozenset(f.pred for f in facts if len(f.args) == 2)
        res = []
        for t in _leaf_types(self.sp.T, node):
            res.append((self.sp.leaf_ioa(t, node.label), self._leaf_S(t, node.label, unary, loops)))
        return self._finish(res)

    # -- operations

    def union(self, a, b):
        res = []
        for g1, S1 in a:
            for g2, S2 in b:
                res.append((self.sp.union(g1, g2), S1 | S2))
        return self._finish(res)

    def _atoms_added(self, key, role, i, j, eid):
        memo = self._with_atoms.setdefault(key, {})
        v = memo.get(eid)
        if v is None:
            ci, mask, f = self.elements[eid]
            m2 = mask
            for b, x, y in self.qi.cqs[ci]["by_role"].get(role, ()):
                if f[x] == i and f[y] == j:
                    m2 |= 1 << b
            v = memo[eid] = eid if m2 == mask else self.intern((ci, m2, f))
        return v

    def _add_S(self, S, role, i, j):
        """Add role atoms between labels i and j, then merge pieces joined by them."""
        key = (role, i, j)
        closed = self._closed.setdefault(key, set())
        if S in closed:
            return S
        cqs = self.qi.cqs
        els, vms = self.elements, self._vms
        merged = self._merged.setdefault(key, {})
        cur = {self._atoms_added(key, role, i, j, e) for e in S}
        # per atom and end (0 source, 1 target): variable mask -> ids that fit there
        ends = {}
        fresh = list(cur)
        while fresh:
            for e in fresh:
                ci, _, f = els[e]
                vm = vms[e]
                for b, x, y in cqs[ci]["by_role"].get(role, ()):
                    if f[x] == i and not vm >> y & 1:
                        ends.setdefault((ci, b, 0), {}).setdefault(vm, []).append(e)
                    if f[y] == j and not vm >> x & 1:
                        ends.setdefault((ci, b, 1), {}).setdefault(vm, []).append(e)
            made = []
            for e in fresh:
                ci, mask, f = els[e]
                vm = vms[e]
                for b, x, y in cqs[ci]["by_role"].get(role, ()):
                    for side, var, other, lab in ((0, x, y, i), (1, y, x, j)):
                        if f[var] != lab or vm >> other & 1:
                            continue
                        for vm2, lst in ends.get((ci, b, 1 - side), {}).items():
                            if vm2 & vm:
                                continue
                            for e2 in lst:
                                pk = (e, e2) if e < e2 else (e2, e)
                                m = merged.get(pk)
                                if m is None:
                                    f2 = tuple(p or q for p, q in zip(f, els[e2][2]))
                                    m = self._viable_id((ci, mask | els[e2][1], f2))
                                    if m >= 0:
                                        m = self._atoms_added(key, role, i, j, m)
                                    merged[pk] = m
                                if m >= 0 and m not in cur:
                                    cur.add(m)
                                    made.append(m)
            fresh = made
        out = frozenset(cur)
        closed.add(out)
        return out

    def add(self, a, role, i, j):
        res = []
        cache = {}
        for g, S in a:
            if not self.sp.edge_ok(g, role, i, j):
                continue
            S2 = cache.get(S)
            if S2 is None:
                S2 = cache[S] = self._add_S(S, role, i, j)
            res.append((g, S2))
        return self._finish(res)

    def _map_S(self, S, key, fn):
        memo = self._mapped.setdefault(key, {})
        new = set()
        for e in S:
            e2 = memo.get(e)
            if e2 is None:
                ci, mask, f = self.elements[e]
                f2 = fn(f)
                e2 = memo[e] = e if f2 == f else self._viable_id((ci, mask, f2))
            if e2 >= 0:
                new.add(e2)
        return frozenset(new)

    def forget(self, a, live, node):
        if not self.prune:
            return a
        res = []
        cache = {}

        def fn(f):
            return tuple(DEAD if (x and x != DEAD and x not in live) else x for x in f)

        for g, S in a:
            S2 = cache.get(S)
            if S2 is None:
                S2 = cache[S] = self._map_S(S, ("forget", live), fn)
            res.append((self.sp.forget(g, live), S2))
        return self._finish(res)

    def relabel(self, a, i, j):
        res = []
        cache = {}

        def fn(f):
            return tuple(j if x == i else x for x in f)

        for g, S in a:
            S2 = cache.get(S)
            if S2 is None:
                S2 = cache[S] = self._map_S(S, ("relabel", i, j), fn)
            res.append((self.sp.relabel(g, i, j), S2))
        return self._finish(res)


def theta_ucq(s, bundle: RewriteBundle, types: AlciTypes | None = None, k=None, prune=False,
              stats=None):
    """Theta(s) over decorated IOAs for a cliquewidth rewrite bundle.

    Role atoms are added maximally at each role-insertion step. With ``prune``,
    states that already contain a complete CQ are dropped and only dominant
    states are kept (verdict-preserving, not Theta-preserving).
    """
    check_expression(s, k)
    if bundle.variant != "cw":
        raise ValueError("theta_ucq needs a cliquewidth rewrite bundle")
    T = types if types is not None else AlciTypes(normalize_ontology(bundle.ontology))
    space = IoaSpace(T, k or max_label(s))
    ops = _UcqOps(space, QueryIndex(bundle.qhat), prune)
    theta, st = fold(s, ops, stats, stop_on_empty=True)
    return theta, st, ops


def has_complete_match(state, ops) -> bool:
    return ops.complete(state[1])


@dataclass
class UcqResult:
    entailed: bool
    bundle: RewriteBundle
    stats: DPStats = field(default_factory=DPStats)
    n_types: int = 0


def eval_ucq_alci(o: Ontology, q: UCQ, db: Database | None, s, candidate=(), bundle=None,
                  stats=None) -> UcqResult:
    """Whether o, D entail q(candidate). Not entailed iff some final state has no complete CQ."""
    _require_match(s, db)
    qb, facts = booleanize(q, tuple(candidate))
    for f in facts:
        s = add_unary_to_leaf(s, f.args[0], [f])
    if bundle is None:
        bundle = rewrite(o, qb, "cw")
    T = AlciTypes(normalize_ontology(bundle.ontology))
    theta, st, ops = theta_ucq(s, bundle, T, prune=True, stats=stats)
    entailed = not any(not has_complete_match(g, ops) for g in theta)
    return UcqResult(entailed, bundle, st, len(T.types))
