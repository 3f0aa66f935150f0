"""Rewriting a UCQ so that homomorphisms only need to be checked on the database part.

Tree-shaped parts of the query that may be matched in the anonymous part of a
model are replaced by fresh unary predicates, and the ontology is extended with
axioms defining those predicates. Two variants exist: ``cw`` (ALCI, tree CQs
without self-loops or multi-edges) and ``tw`` (GF2, CQs of treewidth 1).
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from itertools import combinations, permutations, product

from .normal import alci_to_gf2, has_existential, ontology_concept, subconcepts
from .syntax import (CQ, TOP, TOP_PRED, UCQ, Atom, Concept, Ontology, Role, cname,
                     conj, exists, fand, fatom, feq, fexists, fforall, fiff,
                     formula_preds)

TOP_NAME = "@top"


def _h(s: str) -> str:
    return hashlib.sha1(s.encode()).hexdigest()[:10]


# ---------------------------------------------------------------- tree encodings

def _neighbours(atoms):
    adj = {}
    for a in atoms:
        if len(a.args) == 2 and a.args[0] != a.args[1]:
            u, v = a.args
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
    return adj


def _tree_code(atoms, root) -> str:
    """Canonical string of a treewidth-1 CQ rooted at ``root`` (labels only, no variable names)."""
    adj = _neighbours(atoms)
    by_var = {}
    between = {}
    for a in atoms:
        if len(a.args) == 1 or a.args[0] == a.args[1]:
            if a.pred in (TOP_PRED, TOP_NAME):
                continue
            by_var.setdefault(a.args[0], []).append(a.pred if len(a.args) == 1 else a.pred + "@")
        else:
            u, v = a.args
            between.setdefault((u, v), []).append(a.pred + ">")
            between.setdefault((v, u), []).append(a.pred + "<")
    # iterative post-order
    order, parent, stack = [], {root: None}, [root]
    while stack:
        u = stack.pop()
        order.append(u)
        for w in sorted(adj.get(u, ())):
            if w not in parent:
                parent[w] = u
                stack.append(w)
    code = {}
    for u in reversed(order):
        kids = []
        for w in adj.get(u, ()):
            if parent.get(w) == u:
                kids.append("[" + ",".join(sorted(between[(u, w)])) + "]" + code[w])
        code[u] = "(" + ",".join(sorted(by_var.get(u, ()))) + ";" + "".join(sorted(kids)) + ")"
    return code[root]


def tree_vars(atoms):
    return sorted({v for a in atoms for v in a.args})


def is_tree(atoms, variant="cw") -> bool:
    vs = tree_vars(atoms)
    pairs = set()
    n_bin = 0
    for a in atoms:
        if len(a.args) == 2:
            u, v = a.args
            if u == v:
                if variant == "cw":
                    return False
                continue
            n_bin += 1
            pairs.add(frozenset((u, v)))
    if variant == "cw" and n_bin != len(pairs):
        return False
    if len(pairs) != len(vs) - 1:
        return False
    # connected?
    adj = _neighbours(atoms)
    seen, stack = {vs[0]}, [vs[0]]
    while stack:
        u = stack.pop()
        for w in adj.get(u, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(vs)


@dataclass(frozen=True)
class TreeCQ:
    atoms: frozenset
    root: str | None
    variant: str = "cw"

    @property
    def code(self) -> str:
        if self.root is not None:
            return _tree_code(self.atoms, self.root)
        return min(_tree_code(self.atoms, v) for v in tree_vars(self.atoms))

    @property
    def best_root(self):
        if self.root is not None:
            return self.root
        return min(tree_vars(self.atoms), key=lambda v: (_tree_code(self.atoms, v), v))

    def name(self) -> str:
        tag = "@tr_" if self.root is not None else "@tb_"
        return tag + self.variant + "_" + _h(self.code)

    def role_name(self) -> str:
        return "@r_" + _h(self.code)


def enumerate_trees(q: UCQ, variant="cw"):
    """Tree CQs obtained from CQs of q by dropping atoms and contracting, Boolean and rooted.

    Deduplicated by canonical code. Exponential in |q|; meant for inspection and tests.
    """
    out = {}
    for cq in q.cqs:
        atoms = sorted(a for a in cq.atoms if a.pred not in (TOP_PRED, TOP_NAME))
        for n in range(1, len(atoms) + 1):
            for sub in combinations(atoms, n):
                vs = tree_vars(sub)
                for part in _partitions(vs):
                    ren = {}
                    for block in part:
                        for v in block:
                            ren[v] = block[0]
                    p = frozenset(Atom(a.pred, tuple(ren[x] for x in a.args)) for a in sub)
                    if not is_tree(p, variant):
                        continue
                    for root in [None] + tree_vars(p):
                        t = TreeCQ(p, root, variant)
                        out.setdefault((root is None, t.code), t)
    return list(out.values())


def _partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in _partitions(rest):
        yield [[first]] + p
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]


# ---------------------------------------------------------------- concepts and formulas

def _children(atoms, root):
    adj = _neighbours(atoms)
    parent, order, stack = {root: None}, [], [root]
    while stack:
        u = stack.pop()
        order.append(u)
        for w in sorted(adj.get(u, ())):
            if w not in parent:
                parent[w] = u
                stack.append(w)
    kids = {u: [] for u in order}
    for u in order:
        if parent[u] is not None:
            kids[parent[u]].append(u)
    return order, kids


def concept_of(p: TreeCQ) -> Concept:
    """The ALCI concept whose extension is the set of images of the root under homomorphisms."""
    root = p.best_root
    order, kids = _children(p.atoms, root)
    memo = {}
    for u in reversed(order):
        parts = [cname(a.pred) for a in sorted(p.atoms)
                 if len(a.args) == 1 and a.args[0] == u and a.pred not in (TOP_PRED, TOP_NAME)]
        for w in kids[u]:
            for a in sorted(p.atoms):
                if len(a.args) == 2 and set(a.args) == {u, w}:
                    role = Role(a.pred, a.args[0] == w)
                    parts.append(exists(role, memo[w]))
        memo[u] = conj(*parts) if parts else TOP
    return memo[root]


def formula_of(p: TreeCQ):
    """A guarded two-variable formula (free variable x if rooted) equivalent to the tree CQ."""
    root = p.best_root
    order, kids = _children(p.atoms, root)
    memo = {}
    for u in reversed(order):
        memo[u] = {}
        for var in ("x", "y"):
            other = "y" if var == "x" else "x"
            parts = []
            for a in sorted(p.atoms):
                if a.pred in (TOP_PRED, TOP_NAME):
                    continue
                if len(a.args) == 1 and a.args[0] == u:
                    parts.append(fatom(a.pred, var))
                elif len(a.args) == 2 and a.args == (u, u):
                    parts.append(fatom(a.pred, var, var))
            for w in kids[u]:
                edge = [fatom(a.pred, *[var if x == u else other for x in a.args])
                        for a in sorted(p.atoms) if len(a.args) == 2 and set(a.args) == {u, w}]
                parts.append(fexists((other,), edge[0], fand(*edge[1:], memo[w][other])))
            memo[u][var] = fand(*parts)
    body = memo[root]["x"]
    if p.root is None:
        return fexists(("x",), feq("x", "x"), body)
    return body


# ---------------------------------------------------------------- canonical CQs

def cq_key(atoms):
    """Canonical form of a CQ up to variable renaming: (sorted atoms, variable order)."""
    vs = tree_vars(atoms)
    if not vs:
        return (), []
    color = {v: tuple(sorted((a.pred, a.args.index(v), len(a.args), a.args[0] == a.args[-1])
                             for a in atoms if v in a.args)) for v in vs}
    for _ in range(3):
        new = {}
        for v in vs:
            nb = []
            for a in atoms:
                if len(a.args) == 2 and v in a.args and a.args[0] != a.args[1]:
                    w = a.args[1] if a.args[0] == v else a.args[0]
                    nb.append((a.pred, a.args[0] == v, color[w]))
            new[v] = (color[v], tuple(sorted(nb)))
        ranks = {c: i for i, c in enumerate(sorted(set(new.values())))}
        color = {v: ranks[new[v]] for v in vs}
    classes = {}
    for v in vs:
        classes.setdefault(color[v], []).append(v)
    groups = [classes[c] for c in sorted(classes)]
    n_perm = 1
    for g in groups:
        for i in range(2, len(g) + 1):
            n_perm *= i
    best = None
    choices = product(*[permutations(g) for g in groups]) if n_perm <= 5040 else [tuple(groups)]
    for choice in choices:
        order = [v for g in choice for v in g]
        idx = {v: i for i, v in enumerate(order)}
        key = tuple(sorted((a.pred, tuple(idx[x] for x in a.args)) for a in atoms))
        if best is None or key < best[0]:
            best = (key, order)
    return best


# ---------------------------------------------------------------- booleanization

def booleanize(q: UCQ, candidate=()):
    """Replace answer variables by fresh unary markers; returns (Boolean UCQ, marker facts)."""
    if len(candidate) != len(q.answer):
        raise ValueError("candidate arity %d does not match query arity %d"
                         % (len(candidate), len(q.answer)))
    if not q.answer:
        return q, []
    marks = ["@ans_%d" % i for i in range(len(q.answer))]
    cqs = []
    for cq in q.cqs:
        atoms = set(cq.atoms)
        for m, x in zip(marks, q.answer):
            atoms.add(Atom(m, (x,)))
        cqs.append(CQ(frozenset(atoms)))
    facts = [Atom(m, (c,)) for m, c in zip(marks, candidate)]
    return UCQ(tuple(cqs)), facts


# ---------------------------------------------------------------- the bundle

@dataclass
class RewriteBundle:
    variant: str
    ontology: Ontology
    qhat: UCQ
    trees: dict = field(default_factory=dict)     # fresh name -> TreeCQ
    base_size: int = 0
    query_size: int = 0

    @property
    def omega_size(self) -> int:
        return self.ontology.size()

    @property
    def qhat_size(self) -> int:
        return self.qhat.size()

    def name_table(self):
        return {n: sorted(str(a) for a in t.atoms) + (["root=" + t.root] if t.root else [])
                for n, t in sorted(self.trees.items())}

    def report(self):
        return {"variant": self.variant, "omega_size": self.omega_size,
                "qhat_cqs": len(self.qhat.cqs), "qhat_size": self.qhat_size,
                "trees": len(self.trees), "base_size": self.base_size,
                "query_size": self.query_size}


# Explicit constants for the size envelopes; n = max(2, |q|).
ENVELOPE_FACTOR = 4


def size_envelope(base_size: int, query_size: int, variant="cw"):
    """Upper bounds (|Omega_q|, |qhat|) recorded for the rewriting."""
    n = max(2, query_size)
    e = ENVELOPE_FACTOR * (n * math.log2(n) if variant == "cw" else n)
    return base_size * 2 ** e, 2 ** e


def anonymous_signature(o: Ontology):
    """Predicates that can hold on elements generated by existential restrictions.

    Returns (unary names, role names) or None when the ontology has no
    existential quantification at all.
    """
    if not has_existential(o):
        return None
    if o.dialect == "GF2":
        un, bi = set(), set()
        for s in o.sentences:
            for p, a in formula_preds(s).items():
                (un if a == 1 else bi).add(p)
        return un, bi
    co = ontology_concept(o)
    un = {c.name for c in subconcepts(co) if c.op == "name"}
    roles = {c.role.name for c in subconcepts(co) if c.op == "ex"}
    return un, roles


def _components(atoms, s_vars):
    """Split atoms touching a non-S variable into components connected through non-S variables."""
    parent = {}

    def find(v):
        while parent.setdefault(v, v) != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    rest = []
    for a in atoms:
        ns = [v for v in a.args if v not in s_vars]
        if not ns:
            continue
        rest.append((a, ns))
        for v in ns[1:]:
            parent[find(v)] = find(ns[0])
        find(ns[0])
    comps = {}
    for a, ns in rest:
        comps.setdefault(find(ns[0]), []).append(a)
    return [frozenset(c) for _, c in sorted(comps.items())]


def build_qhat(o: Ontology, q: UCQ, variant="cw"):
    """Rewritten UCQ and the tree CQs it references.

    Returns (UCQ, {name: TreeCQ}). Only non-S variables are contracted: merging
    an S variable is subsumed by homomorphisms that identify variables.
    """
    if not q.is_boolean():
        raise ValueError("build_qhat expects a Boolean UCQ (booleanize first)")
    sig = anonymous_signature(o)
    trees = {}
    seen = {}
    out = []

    def allowed(a):
        if sig is None:
            return False
        un, roles = sig
        return a.pred in (un if len(a.args) == 1 else roles)

    for cq in q.cqs:
        atoms = frozenset(a for a in cq.atoms if a.pred not in (TOP_PRED, TOP_NAME))
        vs = tree_vars(atoms)
        # variables of atoms that no anonymous part can satisfy always stay in S
        forced = {v for a in atoms if not allowed(a) for v in a.args}
        free = [v for v in vs if v not in forced]
        for n_s in range(len(free), -1, -1):
            for extra in combinations(free, n_s):
                s_set = forced | set(extra)
                s_vars = tuple(v for v in vs if v in s_set)
                ns_vars = [v for v in vs if v not in s_set]
                for part in (_partitions(ns_vars) if ns_vars else [[]]):
                    ren = {v: v for v in s_vars}
                    for block in part:
                        for v in block:
                            ren[v] = block[0]
                    p = frozenset(Atom(a.pred, tuple(ren[x] for x in a.args)) for a in atoms)
                    new_atoms = set(a for a in p if all(v in s_set for v in a.args))
                    ok = True
                    for i, comp in enumerate(_components(p, s_set)):
                        roots = sorted({v for a in comp for v in a.args if v in s_set})
                        if len(roots) > 1 or not is_tree(comp, variant):
                            ok = False
                            break
                        t = TreeCQ(comp, roots[0] if roots else None, variant)
                        name = t.name()
                        trees.setdefault(name, TreeCQ(
                            _rename_tree(comp, t), "v0" if roots else None, variant))
                        new_atoms.add(Atom(name, (roots[0] if roots else "@z%d" % i,)))
                    if not ok:
                        continue
                    key, order = cq_key(new_atoms)
                    if key in seen:
                        continue
                    seen[key] = len(out)
                    out.append((new_atoms, order))
    cqs = []
    used = set()
    for i, (atoms, order) in enumerate(out):
        ren = {v: "c%dv%d" % (i, j) for j, v in enumerate(order)}
        ren_atoms = set(Atom(a.pred, tuple(ren[x] for x in a.args)) for a in atoms)
        if variant == "cw":
            ren_atoms |= {Atom(TOP_NAME, (v,)) for v in ren.values()}
        for a in ren_atoms:
            if a.pred in trees:
                used.add(a.pred)
        cqs.append(CQ(frozenset(ren_atoms)))
    trees = {n: t for n, t in trees.items() if n in used}
    return UCQ(tuple(cqs)), trees


def _rename_tree(comp, t: TreeCQ):
    """Tree atoms with variables renamed canonically (root first)."""
    root = t.best_root
    order, _ = _children(comp, root)
    ren = {v: "v%d" % i for i, v in enumerate(order)}
    return frozenset(Atom(a.pred, tuple(ren[x] for x in a.args)) for a in comp)


def build_omega_q(o: Ontology, trees: dict, variant="cw") -> Ontology:
    """Extend the ontology with definitions of the fresh tree predicates."""
    if variant == "cw":
        if o.dialect == "GF2":
            raise ValueError("the cliquewidth rewriting needs an ALC/ALCI ontology")
        cis = list(o.cis) + [(TOP, cname(TOP_NAME))]
        sig = anonymous_signature(o)
        roles = sorted(sig[1]) if sig else []
        for name, t in sorted(trees.items()):
            c = concept_of(t)
            a = cname(name)
            if t.root is not None:
                cis.append((a, c))
                cis.append((c, a))
            else:
                cis.append((a, exists(Role(t.role_name(), False), c)))
                cis.append((c, a))
                for r in roles:
                    for inv in (False, True):
                        cis.append((exists(Role(r, inv), a), a))
        return Ontology("ALCI", cis)
    g = alci_to_gf2(o)
    sents = list(g.sentences)
    for name, t in sorted(trees.items()):
        phi = formula_of(t)
        sents.append(fforall(("x",), feq("x", "x"), fiff(fatom(name, "x"), phi)))
    return Ontology("GF2", sentences=sents)


def rewrite(o: Ontology, q: UCQ, variant="cw") -> RewriteBundle:
    qhat, trees = build_qhat(o, q, variant)
    omega = build_omega_q(o, trees, variant)
    return RewriteBundle(variant, omega, qhat, trees, o.size(), q.size())


def qhat_universe(qhat: UCQ):
    """Per CQ: sorted atom list; subqueries are atom bitmasks over these lists."""
    return [sorted(c.atoms) for c in qhat.cqs]
