"""Treewidth dynamic program for GF2 ontologies with atomic queries and UCQs.

A diagram for a bag fixes a 1-type for every bag constant and a multi-edge for
every pair of bag constants. Pairs not joined by a database fact carry the
empty multi-edge; pairs that are joined may carry extra roles of the ontology.
Abbreviation facts of the rewritten ontology are not materialized: a unary
predicate of the type table holds at c iff its bit is in c's type, a role of the
table holds on (c, d) iff its bit is in the pair's multi-edge, and predicates
outside the table hold only where the database says so.

A partial match of a CQ is a tuple over its variables whose entries are bag
constants, PLUS (matched below, outside the bag) or MINUS (not matched yet).
Only partial matches whose matched variables are connected in the query are
stored.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations, product

from .dp import DPStats
from .errors import ValidationError
from .normal import alci_to_gf2
from .rewrite import RewriteBundle, booleanize, rewrite
from .syntax import CQ, UCQ, Atom, Database, Ontology, is_label
from .typesys import Gf2Types, reduce_domains

PLUS = "+"
MINUS = "-"


# ================================================================ decompositions

@dataclass
class TreeDecomposition:
    bags: dict                                  # node id -> frozenset of constants
    edges: list = field(default_factory=list)   # undirected (id, id)
    root: object = None

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0) - 1

    def children(self) -> dict:
        adj = {v: [] for v in self.bags}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        root = self.root if self.root is not None else min(self.bags, key=str)
        kids = {root: []}
        order = [root]
        for v in order:
            for w in sorted(adj[v], key=str):
                if w not in kids:
                    kids[w] = []
                    kids[v].append(w)
                    order.append(w)
        return kids

    def postorder(self):
        kids = self.children()
        root = self.root if self.root is not None else min(self.bags, key=str)
        out, stack = [], [(root, False)]
        while stack:
            v, done = stack.pop()
            if done:
                out.append(v)
                continue
            stack.append((v, True))
            for w in reversed(kids[v]):
                stack.append((w, False))
        return out

    def to_text(self) -> str:
        lines = ["b %s %s" % (v, " ".join(sorted(b))) for v, b in sorted(self.bags.items(), key=lambda x: str(x[0]))]
        lines += ["e %s %s" % e for e in self.edges]
        if self.root is not None:
            lines.append("r %s" % self.root)
        return "\n".join(lines) + "\n"

    def rerooted(self, root):
        return TreeDecomposition(dict(self.bags), list(self.edges), root)


def td_from_parsed(parsed) -> TreeDecomposition:
    bags, edges, root = parsed
    return TreeDecomposition(dict(bags), list(edges), root)


def gaifman_edges(db: Database):
    out = set()
    for f in db.facts:
        if len(f.args) == 2 and f.args[0] != f.args[1] and not is_label(f.pred):
            out.add(tuple(sorted(f.args)))
    return out


def validate_td(td: TreeDecomposition, db: Database) -> list:
    """Violations of the decomposition conditions (empty list when valid)."""
    errs = []
    if not td.bags:
        return [] if not db.adom else ["no bags"]
    ids = set(td.bags)
    for a, b in td.edges:
        if a not in ids or b not in ids:
            errs.append("edge %s-%s mentions an unknown bag" % (a, b))
    if errs:
        return errs
    if len(td.edges) != len(ids) - 1:
        errs.append("bag graph has %d edges for %d bags, not a tree" % (len(td.edges), len(ids)))
    kids = td.children()
    if len(kids) != len(ids):
        errs.append("bag graph is not connected")
    parent = {w: v for v, ch in kids.items() for w in ch}
    if td.root is not None and td.root not in ids:
        errs.append("root %s is not a bag" % td.root)
    for c in sorted(db.adom):
        holders = {v for v, b in td.bags.items() if c in b}
        if not holders:
            errs.append("constant %s is in no bag" % c)
            continue
        # connected: exactly one holder whose parent is not a holder
        tops = sum(1 for v in holders if parent.get(v) not in holders)
        if tops != 1:
            errs.append("bags containing %s are not connected" % c)
    for a, b in sorted(gaifman_edges(db)):
        if not any(a in bag and b in bag for bag in td.bags.values()):
            errs.append("no bag contains both %s and %s" % (a, b))
    extra = set().union(*td.bags.values()) - set(db.adom)
    if extra:
        errs.append("bags mention constants outside the database: %s" % sorted(extra))
    return errs


def min_fill_decomposition(db: Database) -> TreeDecomposition:
    """Tree decomposition from a min-fill elimination order (ties: smallest name)."""
    verts = sorted(db.adom)
    if not verts:
        return TreeDecomposition({0: frozenset()}, [], 0)
    adj = {v: set() for v in verts}
    for a, b in gaifman_edges(db):
        adj[a].add(b)
        adj[b].add(a)
    order, bags = [], []
    alive = set(verts)
    while alive:
        def fill(v):
            ns = sorted(adj[v] & alive)
            return sum(1 for a, b in combinations(ns, 2) if b not in adj[a])
        v = min(sorted(alive), key=fill)
        ns = adj[v] & alive
        for a, b in combinations(sorted(ns), 2):
            adj[a].add(b)
            adj[b].add(a)
        bags.append(frozenset(ns | {v}))
        order.append(v)
        alive.discard(v)
    pos = {v: i for i, v in enumerate(order)}
    edges = []
    roots = []
    for i, v in enumerate(order):
        later = [w for w in bags[i] if pos[w] > i]
        if later:
            j = min(pos[w] for w in later)
            edges.append((i, j))
        else:
            roots.append(i)
    # components hang off the last root
    top = roots[-1]
    for r in roots[:-1]:
        edges.append((r, top))
    return TreeDecomposition({i: b for i, b in enumerate(bags)}, edges, top)


def binarize(td: TreeDecomposition) -> tuple:
    """Rooted tree where every node has at most two children; extra nodes copy bags.

    Returns (bags, children, root).
    """
    kids = td.children()
    root = td.root if td.root is not None else min(td.bags, key=str)
    bags = {("n", v): td.bags[v] for v in td.bags}
    children = {}
    fresh = 0
    for v, ch in kids.items():
        node = ("n", v)
        ch = [("n", w) for w in ch]
        while len(ch) > 2:
            fresh += 1
            copy = ("c", fresh)
            bags[copy] = td.bags[v]
            children[node] = [ch[0], copy]
            node, ch = copy, ch[1:]
        children[node] = ch
    return bags, children, ("n", root)


# ================================================================ diagrams

@dataclass(frozen=True)
class Diagram:
    zero: int            # the 0-type shared by all elements
    consts: tuple        # sorted bag constants
    types: tuple         # 1-type per constant
    edges: tuple         # multi-edge per pair (i < j) in combinations order

    def type_of(self, c):
        return self.types[self.consts.index(c)]

    def restrict(self, keep) -> tuple:
        idx = [i for i, c in enumerate(self.consts) if c in keep]
        pairs = {p: m for p, m in zip(combinations(range(len(self.consts)), 2), self.edges)}
        return (self.zero, tuple(self.consts[i] for i in idx), tuple(self.types[i] for i in idx),
                tuple(pairs[(a, b)] for a, b in combinations(idx, 2)))


class DiagramSpace:
    """Diagrams of bags of a fixed database under a fixed type table."""

    def __init__(self, table: Gf2Types, db: Database, domains=None, minimal_edges=False):
        self.tb = table
        self.db = db
        self.domains = domains
        self.minimal_edges = minimal_edges
        self.req = {}
        for f in db.facts:
            if len(f.args) == 2 and f.args[0] != f.args[1] and not is_label(f.pred):
                a, b = f.args
                bit = table.m_bit(f.pred, True)
                self.req.setdefault((a, b), 0)
                self.req.setdefault((b, a), 0)
                if bit is not None:
                    self.req[(a, b)] |= 1 << bit
                    self.req[(b, a)] |= 1 << table.m_bit(f.pred, False)
        self.unary_facts = {}
        self.loop_facts = {}
        self.pair_facts = {}
        for f in db.facts:
            if is_label(f.pred):
                continue
            if len(f.args) == 1:
                self.unary_facts.setdefault(f.args[0], set()).add(f.pred)
            elif f.args[0] == f.args[1]:
                self.loop_facts.setdefault(f.args[0], set()).add(f.pred)
            else:
                self.pair_facts.setdefault(f.args, set()).add(f.pred)
        self._cache = {}

    def const_types(self, c):
        facts = [f for f in self.db.facts if f.args == (c,) or f.args == (c, c)]
        cands = self.tb.types if self.domains is None else sorted(self.domains.get(c, self.tb.types))
        return [t for t in cands if self.tb.realizes_leaf(t, facts, c)]

    def edge_options(self, a, ta, b, tb_):
        tb = self.tb
        if tb.zero_type(ta) != tb.zero_type(tb_):
            return []
        if (a, b) not in self.req:
            return [0] if tb.valid(ta, 0, tb_) else []
        need = self.req[(a, b)]
        ms = [m for m in tb.all_M if m & need == need and tb.valid(ta, m, tb_)]
        if self.minimal_edges:
            # more role atoms can only create more matches
            ms = [m for m in ms if not any(x != m and x & m == x for x in ms)]
        return ms

    def diagrams(self, bag) -> list:
        """All diagrams for the database restricted to ``bag``."""
        consts = tuple(sorted(bag))
        if consts in self._cache:
            return self._cache[consts]
        out = []
        per = [self.const_types(c) for c in consts]
        pairs = list(combinations(range(len(consts)), 2))

        if not consts:
            out = [Diagram(z, (), (), ()) for z in sorted({self.tb.zero_type(t) for t in self.tb.types})]
            self._cache[consts] = out
            return out

        def extend(i, types):
            if i == len(consts):
                opts = [self.edge_options(consts[a], types[a], consts[b], types[b]) for a, b in pairs]
                if all(opts):
                    for ms in product(*opts):
                        out.append(Diagram(self.tb.zero_type(types[0]), consts, tuple(types), tuple(ms)))
                return
            z = self.tb.zero_type(types[0]) if types else None
            for t in per[i]:
                if z is not None and self.tb.zero_type(t) != z:
                    continue
                # prune early on pairs with the constants already chosen
                if any(not self.edge_options(consts[j], types[j], consts[i], t) for j in range(i)):
                    continue
                extend(i + 1, types + [t])

        extend(0, [])
        self._cache[consts] = out
        return out

    # -------------------------------------------------------------- visible facts

    def holds(self, d: Diagram, pred: str, args) -> bool:
        tb = self.tb
        if len(args) == 1:
            c = args[0]
            v = tb.has_unary(d.type_of(c), pred)
            if v is not None:
                return v
            return pred in self.unary_facts.get(c, ())
        a, b = args
        if a == b:
            v = tb.has_loop(d.type_of(a), pred)
            if v is not None:
                return v
            return pred in self.loop_facts.get(a, ())
        bit = tb.m_bit(pred, True)
        if bit is None:
            return pred in self.pair_facts.get((a, b), ())
        i, j = d.consts.index(a), d.consts.index(b)
        if i < j:
            m = d.edges[_pair_index(len(d.consts), i, j)]
            return bool(m >> bit & 1)
        m = d.edges[_pair_index(len(d.consts), j, i)]
        return bool(m >> tb.m_bit(pred, False) & 1)


def _pair_index(n, i, j):
    # position of (i, j), i < j, in combinations(range(n), 2)
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


# ================================================================ partial matches

class MatchIndex:
    """Per CQ of q-hat: variables, atoms as variable masks, neighbour masks, components."""

    def __init__(self, qhat: UCQ):
        self.cqs = []
        self.preds = sorted({(a.pred, len(a.args)) for cq in qhat.cqs for a in cq.atoms})
        self.piece_cache = {}
        for cq in qhat.cqs:
            vs = sorted({v for a in cq.atoms for v in a.args})
            pos = {v: i for i, v in enumerate(vs)}
            atoms = [(a.pred, tuple(pos[v] for v in a.args)) for a in sorted(cq.atoms)]
            nbr = [0] * len(vs)
            for _, args in atoms:
                for x in args:
                    for y in args:
                        if x != y:
                            nbr[x] |= 1 << y
            amask = [sum(1 << x for x in set(args)) for _, args in atoms]
            self.cqs.append({"vars": vs, "atoms": atoms, "amask": amask, "nbr": nbr,
                             "own": [[b for b, m in enumerate(amask) if m == 1 << x]
                                     for x in range(len(vs))],
                             "link": [[b for b, m in enumerate(amask) if m >> x & 1 and m != 1 << x]
                                      for x in range(len(vs))],
                             "components": _components(nbr),
                             "plans": {}})   # merge plans, shared by all bags

    def visible(self, space: DiagramSpace, d: Diagram):
        """The query-relevant facts of a diagram: all that pieces can observe of it."""
        if not self.preds:
            return ()
        out = []
        cs = d.consts
        for pred, ar in self.preds:
            if ar == 1:
                out.extend(space.holds(d, pred, (c,)) for c in cs)
            else:
                out.extend(space.holds(d, pred, (a, b)) for a in cs for b in cs)
        return tuple(out)

    def complete(self, pieces) -> bool:
        """Some CQ has every connected component matched by one piece."""
        done = set()
        for ci, m in pieces:
            done.add((ci, _settled(m)))
        return any(c["components"] and all((ci, k) in done for k in c["components"])
                   for ci, c in enumerate(self.cqs))


def _components(nbr):
    seen, out = 0, []
    for x in range(len(nbr)):
        if seen >> x & 1:
            continue
        comp = frontier = 1 << x
        while frontier:
            y = (frontier & -frontier).bit_length() - 1
            frontier &= frontier - 1
            new = nbr[y] & ~comp
            comp |= new
            frontier |= new
        seen |= comp
        out.append(comp)
    return tuple(out)


def _settled(m):
    vm = 0
    for i, v in enumerate(m):
        if v != MINUS:
            vm |= 1 << i
    return vm


def _lift(cq, m, bag):
    """A child piece seen from the parent bag; None when a leaving variable has an unmatched neighbour."""
    out = list(m)
    vm = None
    for x, v in enumerate(m):
        if v == MINUS or v == PLUS or v in bag:
            continue
        if vm is None:
            vm = _settled(m)
        if cq["nbr"][x] & ~vm:
            return None
        out[x] = PLUS
    return tuple(out)


def _union_plan(cq, p, vp, q, vq):
    """Structural part of merging two pieces: the union and the atoms still to check.

    None when the pieces clash on a shared variable or an atom to check has a
    PLUS end (a PLUS variable's neighbours are all inside its own piece).
    """
    both = vp & vq
    u = list(p)
    for x, v in enumerate(q):
        if v == MINUS:
            continue
        if both >> x & 1:
            if v == PLUS or p[x] == PLUS or p[x] != v:
                return None
        else:
            u[x] = v
    un = vp | vq
    checks = []
    for b, am in enumerate(cq["amask"]):
        if am & ~un or not am & ~vp or not am & ~vq:
            continue
        pred, args = cq["atoms"][b]
        vals = tuple(u[x] for x in args)
        if PLUS in vals:
            return None
        checks.append((pred, vals))
    return tuple(u), tuple(checks)


def node_pieces(mi: MatchIndex, space: DiagramSpace, d: Diagram, child_sets, bag) -> frozenset:
    """Memoized on what the query can see of d."""
    key = (d.consts, mi.visible(space, d), tuple(child_sets), bag)
    v = mi.piece_cache.get(key)
    if v is None:
        v = mi.piece_cache[key] = _node_pieces(mi, space, d, child_sets, bag)
    return v


def _node_pieces(mi: MatchIndex, space: DiagramSpace, d: Diagram, child_sets, bag) -> frozenset:
    """Connected partial matches at a bag with diagram d.

    A piece maps a query-connected set of variables to bag constants or PLUS;
    any partial match is a disjoint, atom-free combination of pieces, so the
    pieces carry the same information. The generators are the child pieces,
    lifted so that constants leaving the bag become PLUS, and single variables
    placed on bag constants. Every piece is a connected union of generators, so
    new pieces are only ever extended by one generator at a time. Two pieces
    never share a PLUS variable: it may stand for different forgotten constants.
    Unions of pieces from the first child alone are already pieces of that child.
    """
    out = set()
    seen_facts = {}

    def holds(pred, vals):
        key = (pred, vals)
        v = seen_facts.get(key)
        if v is None:
            v = seen_facts[key] = space.holds(d, pred, vals)
        return v

    for ci, cq in enumerate(mi.cqs):
        n = len(cq["vars"])
        nbr = cq["nbr"]
        plans = cq["plans"]
        known = {}
        gen_val = {}                         # (x, constant) -> generators with that value

        def gen(m, vm):
            for x in range(n):
                if vm >> x & 1:
                    if m[x] != PLUS:
                        gen_val.setdefault((x, m[x]), []).append((m, vm))

        fresh = []
        for k, cs in enumerate(child_sets):
            for cj, m in cs:
                if cj != ci:
                    continue
                m2 = _lift(cq, m, bag)
                if m2 is None or m2 in known:
                    continue
                vm = known[m2] = _settled(m2)
                gen(m2, vm)
                if k:
                    fresh.append(m2)
        for x in range(n):
            for c in d.consts:
                m = tuple(c if y == x else MINUS for y in range(n))
                if m in known:
                    continue
                if all(holds(cq["atoms"][b][0], (c,) * len(cq["atoms"][b][1]))
                       for b in cq["own"][x]):
                    known[m] = 1 << x
                    gen(m, 1 << x)
                    fresh.append(m)
        while fresh:
            made = []
            for p in fresh:
                vp = known[p]
                outside = 0
                cands = {}
                for x in range(n):
                    if vp >> x & 1:
                        outside |= nbr[x]
                        if p[x] != PLUS:
                            for q, vq in gen_val.get((x, p[x]), ()):
                                # if either variable set contains the other, the union is known or invalid
                                if vq & ~vp and vp & ~vq:
                                    cands[q] = vq
                outside &= ~vp
                while outside:
                    y = (outside & -outside).bit_length() - 1
                    outside &= outside - 1
                    # atoms joining y to the piece decide which constants y may take
                    links = [(cq["atoms"][b][0], cq["atoms"][b][1]) for b in cq["link"][y]
                             if cq["amask"][b] & ~(vp | 1 << y) == 0]
                    for c in d.consts:
                        if not all(holds(pred, tuple(c if z == y else p[z] for z in args))
                                   for pred, args in links):
                            continue
                        for q, vq in gen_val.get((y, c), ()):
                            if not vq & vp:
                                cands[q] = vq
                for q, vq in cands.items():
                    key = (p, q)
                    plan = plans.get(key, 0)
                    if plan == 0:
                        plan = plans[key] = _union_plan(cq, p, vp, q, vq)
                    if plan is None:
                        continue
                    r, checks = plan
                    if r in known:
                        continue
                    if all(holds(pred, vals) for pred, vals in checks):
                        known[r] = vp | vq
                        made.append(r)
            fresh = made
        out.update((ci, m) for m in known)
    return frozenset(out)


# ================================================================ the DP

@dataclass
class TwResult:
    entailed: bool
    width: int = 0
    stats: DPStats = field(default_factory=DPStats)
    bundle: RewriteBundle | None = None
    n_types: int = 0


def _minimal_sets(groups: dict) -> set:
    """Per diagram keep only the subset-minimal match sets."""
    out = set()
    for d, sets in groups.items():
        keep = []
        for s in sorted(sets, key=len):
            if any(k <= s for k in keep):
                continue
            keep.append(s)
        out.update((d, s) for s in keep)
    return out


def theta_tw(td: TreeDecomposition, db: Database, qhat: UCQ, table: Gf2Types, prune=False,
             stats: DPStats | None = None, domains=None):
    """Theta at the root of td as a set of (Diagram, frozenset of (cq index, match))."""
    errs = validate_td(td, db)
    if errs:
        raise ValidationError("invalid tree decomposition: " + "; ".join(errs[:3]))
    stats = stats if stats is not None else DPStats()
    t0 = time.perf_counter()
    space = DiagramSpace(table, db, domains, minimal_edges=prune)
    mi = MatchIndex(qhat)
    bags, children, root = binarize(td)
    order = []
    stack = [(root, False)]
    while stack:
        v, done = stack.pop()
        if done:
            order.append(v)
            continue
        stack.append((v, True))
        for w in children.get(v, ()):
            stack.append((w, False))
    vals = {}
    height = {}

    def finish(groups):
        if prune:
            groups = {d: [s for s in ss if not mi.complete(s)] for d, ss in groups.items()}
            return _minimal_sets(groups)
        return {(d, s) for d, ss in groups.items() for s in ss}

    for v in order:
        bag = bags[v]
        kids = children.get(v, [])
        height[v] = 1 + max((height[w] for w in kids), default=-1)
        groups = {}
        if not kids:
            for d in space.diagrams(bag):
                groups.setdefault(d, set()).add(node_pieces(mi, space, d, (), bag))
            res = finish(groups)
            kind = "leaf"
        else:
            kid_vals = [vals.pop(w) for w in kids]
            kid_bags = [bags[w] for w in kids]
            # index child abstractions by the restriction of their diagram to the shared part
            idx = []
            for kv, kb in zip(kid_vals, kid_bags):
                shared = bag & kb
                by = {}
                for d, s in kv:
                    by.setdefault(d.restrict(shared), []).append((d, s))
                idx.append((shared, by))
            memo = {}
            for d in space.diagrams(bag):
                lists = []
                for shared, by in idx:
                    lst = by.get(d.restrict(shared))
                    if not lst:
                        break
                    lists.append(lst)
                else:
                    for combo in product(*lists):
                        key = (d, tuple(s for _, s in combo))
                        if key in memo:
                            continue
                        msets = [s for _, s in combo]
                        memo[key] = True
                        groups.setdefault(d, set()).add(node_pieces(mi, space, d, msets, bag))
            res = finish(groups)
            kind = "join" if len(kids) > 1 else "introduce-forget"
        stats.note(kind, len(res), height[v])
        vals[v] = res
        if not res:
            stats.early_exit = True
            stats.seconds = time.perf_counter() - t0
            return set(), stats
    stats.seconds = time.perf_counter() - t0
    return vals[root], stats


def _decomposition_for(db: Database, td):
    if td is None:
        return min_fill_decomposition(db)
    if isinstance(td, TreeDecomposition):
        return td
    return td_from_parsed(td)


def eval_gf2_tw(o: Ontology, q: UCQ, db: Database, td=None, candidate=(), stats=None,
                bundle: RewriteBundle | None = None, reduce=True) -> TwResult:
    """Whether o, D entail q(candidate), via the rewriting and the treewidth DP.

    ``reduce`` selects the leaf type filter: True for arc consistency plus
    substitution, False for arc consistency only, None for no filter.
    """
    o = alci_to_gf2(o)
    qb, facts = booleanize(q, tuple(candidate))
    db2 = db.union(facts) if facts else db
    if bundle is None:
        bundle = rewrite(o, qb, "tw")
    table = Gf2Types(bundle.ontology)
    t = _decomposition_for(db, td)
    domains = reduce_domains(table, db2, substitute=reduce, query_preds=bundle.qhat.preds()) \
        if reduce is not None else None
    theta, st = theta_tw(t, db2, bundle.qhat, table, prune=True, stats=stats, domains=domains)
    entailed = all(MatchIndex(bundle.qhat).complete(s) for _, s in theta)
    return TwResult(entailed, t.width, st, bundle, len(table.types))


def eval_aq_tw(o: Ontology, pred: str, const: str, db: Database, td=None, stats=None,
               reduce=True) -> TwResult:
    """Atomic query pred(const) without rewriting the ontology.

    The candidate is marked with a fresh unary fact and the query becomes the
    Boolean CQ asking for an element carrying both pred and the marker.
    """
    if const not in db.adom:
        raise ValidationError("constant %s is not in the database" % const)
    o = alci_to_gf2(o)
    mark = "@ans"
    db2 = db.union([Atom(mark, (const,))])
    qhat = UCQ((CQ(frozenset([Atom(pred, ("x",)), Atom(mark, ("x",))])),))
    table = Gf2Types(o)
    t = _decomposition_for(db, td)
    domains = reduce_domains(table, db2, substitute=reduce, query_preds=qhat.preds()) \
        if reduce is not None else None
    theta, st = theta_tw(t, db2, qhat, table, prune=True, stats=stats, domains=domains)
    entailed = all(MatchIndex(qhat).complete(s) for _, s in theta)
    return TwResult(entailed, t.width, st, None, len(table.types))


def sat_tw(o: Ontology, db: Database, td=None, stats=None, reduce=True) -> bool:
    o = alci_to_gf2(o)
    table = Gf2Types(o)
    t = _decomposition_for(db, td)
    domains = reduce_domains(table, db, substitute=reduce) if reduce is not None else None
    theta, _ = theta_tw(t, db, UCQ(()), table, prune=True, stats=stats, domains=domains)
    return bool(theta)
