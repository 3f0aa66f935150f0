"""Cliquewidth dynamic program for GF2 with atomic queries, over model abstractions.

A model abstraction is a pair ``(T, E)`` (stored with its 0-type): ``T`` is a tuple of frozensets of 1-types,
one per label, and ``E`` a frozenset of ``(i, j, t1, M, t2)`` with ``i < j``: some
constant with label i and type t1 and some constant with label j and type t2 are
joined by the multi-edge M (bitmask, x = the label-i constant). Multi-edges only
record roles of the ontology; other roles do not constrain anything.
"""
from __future__ import annotations

from .dp import antichain, check_expression, fold, max_label
from .errors import ValidationError
from .kexpr import add_unary_to_leaf, eval_kexpr, kexpr_matches
from .normal import alci_to_gf2
from .syntax import Atom, Database, Ontology, fatom, feq, fforall, fimp, fnot, is_label
from .typesys import Gf2Types, reduce_domains


def multi_edge_of(db: Database, a, b):
    """Atoms r(x,y) / r(y,x) describing the role facts between a (as x) and b (as y)."""
    if a == b:
        raise ValidationError("multi-edges are defined for distinct constants only")
    out = set()
    for f in db.facts:
        if len(f.args) == 2 and not is_label(f.pred):
            if f.args == (a, b):
                out.add(Atom(f.pred, ("x", "y")))
            elif f.args == (b, a):
                out.add(Atom(f.pred, ("y", "x")))
    return frozenset(out)


class _Gf2Ops:
    """Abstractions are ``(zero, T, E)``; ``zero`` is the shared 0-type (None while T is empty)."""

    def __init__(self, table: Gf2Types, k: int, prune: bool, domains=None):
        self.tb = table
        self.domains = domains
        self.k = k
        self.prune = prune

    def _p(self, xs):
        xs = set(xs)
        if self.prune and 1 < len(xs) <= 2000:
            def dom(a, b):
                return a[0] == b[0] and a[2] <= b[2] and all(x <= y for x, y in zip(a[1], b[1]))
            return set(antichain(sorted(xs, key=lambda a: (len(a[2]), sum(map(len, a[1])))), dom))
        return xs

    def leaf(self, node):
        facts = [f for f in node.facts if not is_label(f.pred)]
        empty = [frozenset()] * self.k
        out = []
        cands = self.tb.types if self.domains is None else sorted(self.domains.get(node.const, self.tb.types))
        for t in cands:
            if self.tb.realizes_leaf(t, facts, node.const):
                T = list(empty)
                T[node.label - 1] = frozenset([t])
                out.append((self.tb.zero_type(t), tuple(T), frozenset()))
        return self._p(out)

    def union(self, a, b):
        out = []
        k = self.k
        for z1, T1, E1 in a:
            for z2, T2, E2 in b:
                if z1 != z2:
                    continue
                T = tuple(x | y for x, y in zip(T1, T2))
                E = set(E1) | set(E2)
                for i in range(k):
                    if not T1[i]:
                        continue
                    for j in range(k):
                        if i == j or not T2[j]:
                            continue
                        for t1 in T1[i]:
                            for t2 in T2[j]:
                                if i < j:
                                    E.add((i, j, t1, 0, t2))
                                else:
                                    E.add((j, i, t2, 0, t1))
                out.append((z1, T, frozenset(E)))
        return self._p(out)

    def add(self, a, role, i, j):
        tb = self.tb
        fwd = tb.m_bit(role, True)
        if fwd is None:
            return a
        i, j = i - 1, j - 1
        if i < j:
            lo, hi, bit = i, j, fwd
        else:
            lo, hi, bit = j, i, tb.m_bit(role, False)
        out = []
        for z, T, E in a:
            ok = True
            newE = set()
            for e in E:
                if e[0] == lo and e[1] == hi:
                    m = e[3] | (1 << bit)
                    if tb.compatible(e[2], m, e[4]) is None:
                        ok = False
                        break
                    newE.add((lo, hi, e[2], m, e[4]))
                else:
                    newE.add(e)
            if ok:
                out.append((z, T, frozenset(newE)))
        return self._p(out)

    def relabel(self, a, i, j):
        i, j = i - 1, j - 1
        tb = self.tb
        out = []
        for z, T, E in a:
            T2 = list(T)
            T2[j] = T[j] | T[i]
            T2[i] = frozenset()
            newE = set()
            for lo, hi, t1, m, t2 in E:
                if lo == i:
                    lo = j
                if hi == i:
                    hi = j
                if lo == hi:
                    continue
                if lo > hi:
                    lo, hi, t1, m, t2 = hi, lo, t2, tb.swap_m(m), t1
                newE.add((lo, hi, t1, m, t2))
            out.append((z, tuple(T2), frozenset(newE)))
        return self._p(out)

    def forget(self, a, live, node):
        """Constants on labels outside ``live`` never gain role facts again."""
        if not self.prune:
            return a
        dead = [l - 1 for l in range(1, self.k + 1) if l not in live]
        if not dead:
            return a
        ds = set(dead)
        out = set()
        for z, T, E in a:
            T2 = tuple(frozenset() if i in ds else ts for i, ts in enumerate(T))
            E2 = frozenset(e for e in E if e[0] not in ds and e[1] not in ds)
            out.add((z, T2, E2))
        return self._p(out)


def theta_gf2(s, o: Ontology, table: Gf2Types | None = None, k=None, prune=False, stats=None,
              reduce=False):
    """Theta at the root of s. ``reduce`` restricts leaf types via ``reduce_domains``,
    which keeps emptiness of Theta but not Theta itself."""
    check_expression(s, k)
    o = alci_to_gf2(o)
    tb = table if table is not None else Gf2Types(o)
    domains = reduce_domains(tb, eval_kexpr(s, with_labels=False)) if reduce else None
    theta, st = fold(s, _Gf2Ops(tb, k or max_label(s), prune, domains), stats, stop_on_empty=True)
    return theta, st


def sat_gf2(o: Ontology, db: Database | None, s, stats=None, reduce=True) -> bool:
    if db is not None and not kexpr_matches(s, db):
        raise ValidationError("the k-expression does not generate the database")
    theta, _ = theta_gf2(s, o, prune=True, stats=stats, reduce=reduce)
    return bool(theta)


def marker_sentence(pred: str, arity: int):
    m = "@not_" + pred
    if arity == 1:
        return fforall(("x",), feq("x", "x"), fimp(fatom(m, "x"), fnot(fatom(pred, "x"))))
    return fforall(("x", "y"), fatom(m, "x", "y"), fnot(fatom(pred, "x", "y")))


def eval_aq_gf2(o: Ontology, pred: str, consts: tuple, db: Database | None, s,
                extended_kexpr=None, stats=None, reduce=True) -> bool:
    """Whether o, D entail pred(consts) for a unary or binary atom.

    For a binary atom over two distinct constants the caller must supply a
    k-expression for D extended by the marker fact ``@not_pred(c, d)``.
    """
    consts = tuple(consts)
    if len(consts) not in (1, 2):
        raise ValidationError("atomic queries have arity 1 or 2")
    if db is not None:
        if not kexpr_matches(s, db):
            raise ValidationError("the k-expression does not generate the database")
        for c in consts:
            if c not in db.adom:
                raise ValidationError("constant %s is not in the database" % c)
    g = alci_to_gf2(o)
    o2 = Ontology("GF2", sentences=list(g.sentences) + [marker_sentence(pred, len(consts))])
    marker = Atom("@not_" + pred, consts)
    if len(consts) == 1 or consts[0] == consts[1]:
        s2 = add_unary_to_leaf(s, consts[0], [marker])
    else:
        if extended_kexpr is None:
            raise ValidationError("binary atomic queries need a k-expression for the database "
                                  "extended with %s" % (marker,))
        s2 = extended_kexpr
        if db is not None and not kexpr_matches(s2, db.union([marker])):
            raise ValidationError("extended k-expression does not generate D plus the marker fact")
    theta, _ = theta_gf2(s2, o2, prune=True, stats=stats, reduce=reduce)
    return not theta
