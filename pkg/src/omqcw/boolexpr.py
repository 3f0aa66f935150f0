"""Tiny Boolean expression toolkit used to enumerate locally consistent types.

Expressions are ``True``, ``False``, ``("v", i)``, ``("not", e)``, ``("and", (e, ...))``
and ``("or", (e, ...))``. Constructors fold constants.
"""
from __future__ import annotations


def var(i: int):
    return ("v", i)


def bnot(e):
    if e is True:
        return False
    if e is False:
        return True
    if e[0] == "not":
        return e[1]
    return ("not", e)


def band(*es):
    out = []
    for e in es:
        if e is False:
            return False
        if e is True:
            continue
        if e[0] == "and":
            out.extend(e[1])
        else:
            out.append(e)
    if not out:
        return True
    if len(out) == 1:
        return out[0]
    return ("and", tuple(out))


def bor(*es):
    out = []
    for e in es:
        if e is True:
            return True
        if e is False:
            continue
        if e[0] == "or":
            out.extend(e[1])
        else:
            out.append(e)
    if not out:
        return False
    if len(out) == 1:
        return out[0]
    return ("or", tuple(out))


def bimp(a, b):
    return bor(bnot(a), b)


def restrict(e, i: int, val: bool):
    if e is True or e is False:
        return e
    op = e[0]
    if op == "v":
        return val if e[1] == i else e
    if op == "not":
        return bnot(restrict(e[1], i, val))
    parts = [restrict(a, i, val) for a in e[1]]
    return band(*parts) if op == "and" else bor(*parts)


def variables(e, acc=None) -> set:
    acc = set() if acc is None else acc
    if e is True or e is False:
        return acc
    if e[0] == "v":
        acc.add(e[1])
    elif e[0] == "not":
        variables(e[1], acc)
    else:
        for a in e[1]:
            variables(a, acc)
    return acc


def _occurrences(e, acc):
    if e is True or e is False:
        return
    if e[0] == "v":
        acc[e[1]] = acc.get(e[1], 0) + 1
    elif e[0] == "not":
        _occurrences(e[1], acc)
    else:
        for a in e[1]:
            _occurrences(a, acc)


def models(e, nvars: int, limit: int | None = None):
    """All satisfying assignments over variables 0..nvars-1, as int bitmasks.

    Splits on the most frequent remaining variable; once the expression is
    constant the unconstrained variables are expanded directly.
    """
    out = []

    def expand(mask, free):
        if not free:
            out.append(mask)
            return
        n = len(free)
        for bits in range(1 << n):
            m = mask
            for j in range(n):
                if bits >> j & 1:
                    m |= 1 << free[j]
            out.append(m)

    def rec(e, mask, unassigned):
        if limit is not None and len(out) > limit:
            raise OverflowError("too many models")
        if e is False:
            return
        if e is True:
            expand(mask, sorted(unassigned))
            return
        occ = {}
        _occurrences(e, occ)
        v = max(occ, key=lambda k: (occ[k], -k))
        rest = unassigned - {v}
        rec(restrict(e, v, False), mask, rest)
        rec(restrict(e, v, True), mask | (1 << v), rest)

    rec(e, 0, frozenset(range(nvars)))
    return out


def to_python(e, names: dict | None = None) -> str:
    """Python source for ``e`` where variable i reads bit i of ``m``."""
    if e is True:
        return "True"
    if e is False:
        return "False"
    op = e[0]
    if op == "v":
        if names is not None:
            return names[e[1]]
        return "(m >> %d & 1)" % e[1]
    if op == "not":
        return "(not %s)" % to_python(e[1], names)
    j = " and " if op == "and" else " or "
    return "(" + j.join(to_python(a, names) for a in e[1]) + ")"


def compile_mask_fn(e):
    src = "lambda m: bool(%s)" % to_python(e)
    return eval(src)  # noqa: S307 - source generated from our own AST
