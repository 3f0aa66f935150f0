"""Homomorphisms from CQs into finite interpretations and databases."""
from __future__ import annotations

from .syntax import TOP_PRED, Atom, Database, Interpretation


def _order_atoms(atoms, bound):
    """Greedy order: atoms whose variables are already bound come first."""
    rest = list(atoms)
    out = []
    known = set(bound)
    while rest:
        rest.sort(key=lambda a: (-sum(v in known for v in a.args), len(a.args) == 1, a))
        a = rest.pop(0)
        out.append(a)
        known.update(a.args)
    return out


def hom_check(atoms, interp: Interpretation, binding: dict | None = None) -> bool:
    """True iff ``binding`` extends to a homomorphism from the atoms into ``interp``."""
    return find_hom(atoms, interp, binding) is not None


def find_hom(atoms, interp: Interpretation, binding: dict | None = None):
    binding = dict(binding or {})
    order = _order_atoms(atoms, binding)
    dom = interp.domain
    # candidate successors per role
    succ: dict = {}
    pred: dict = {}
    for r, pairs in interp.binary.items():
        s, p = {}, {}
        for a, b in pairs:
            s.setdefault(a, []).append(b)
            p.setdefault(b, []).append(a)
        succ[r], pred[r] = s, p
    domset = set(dom)

    def candidates(atom, h):
        if len(atom.args) == 1:
            return dom
        x, y = atom.args
        if x in h:
            return succ.get(atom.pred, {}).get(h[x], ())
        if y in h:
            return pred.get(atom.pred, {}).get(h[y], ())
        return dom

    def rec(i, h):
        if i == len(order):
            return dict(h)
        atom = order[i]
        free = [v for v in dict.fromkeys(atom.args) if v not in h]
        if not free:
            if all(h[v] in domset for v in atom.args) and interp.holds_atom(atom, h):
                return rec(i + 1, h)
            return None
        if len(free) == 2:
            pairs = interp.binary.get(atom.pred, ())
            for a, b in sorted(pairs):
                if a not in domset or b not in domset:
                    continue
                h[atom.args[0]], h[atom.args[1]] = a, b
                r = rec(i + 1, h)
                if r is not None:
                    return r
            for v in free:
                h.pop(v, None)
            return None
        v = free[0]
        for d in candidates(atom, h):
            h[v] = d
            if interp.holds_atom(atom, h):
                r = rec(i + 1, h)
                if r is not None:
                    return r
        del h[v]
        return None

    return rec(0, binding)


def db_interpretation(db: Database, extra_unary=None) -> Interpretation:
    return Interpretation.from_database(db)


def db_hom_exists(atoms, db: Database, binding=None) -> bool:
    return hom_check(atoms, Interpretation.from_database(db), binding)


def top_atom(v) -> Atom:
    return Atom(TOP_PRED, (v,))
