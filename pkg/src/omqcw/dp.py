"""Bottom-up driver shared by the k-expression dynamic programs."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .errors import ValidationError
from .kexpr import AddRole, Intro, Relabel, Union, postorder, validate_kexpr


@dataclass
class DPStats:
    nodes: int = 0
    peak: int = 0
    by_kind: dict = field(default_factory=dict)   # kind -> max |Theta| seen
    levels: list = field(default_factory=list)    # max |Theta| per node height, leaves first
    seconds: float = 0.0
    early_exit: bool = False

    def note(self, kind, n, height=None):
        self.nodes += 1
        self.peak = max(self.peak, n)
        if n > self.by_kind.get(kind, -1):
            self.by_kind[kind] = n
        if height is not None:
            while len(self.levels) <= height:
                self.levels.append(0)
            self.levels[height] = max(self.levels[height], n)

    def to_dict(self):
        return {"nodes": self.nodes, "peak": self.peak, "by_kind": dict(self.by_kind),
                "levels": list(self.levels), "seconds": round(self.seconds, 6),
                "early_exit": self.early_exit}


def check_expression(s, k=None):
    rep = validate_kexpr(s, k)
    if not rep.valid:
        raise ValidationError("invalid k-expression: " + "; ".join(rep.violations[:3]))
    return rep


def live_labels(s) -> dict:
    """Map id(node) -> labels of that node's database that some ancestor may still add roles to.

    Constants on other labels can never gain role facts again, so their
    bookkeeping can be dropped.
    """
    live = {id(s): frozenset()}
    stack = [s]
    while stack:
        node = stack.pop()
        lv = live[id(node)]
        if isinstance(node, Union):
            kids = [(node.left, lv), (node.right, lv)]
        elif isinstance(node, AddRole):
            kids = [(node.child, lv | {node.src, node.dst})]
        elif isinstance(node, Relabel):
            x = set(lv) - {node.src}
            if node.dst in lv:
                x.add(node.src)
            kids = [(node.child, frozenset(x))]
        else:
            kids = []
        for ch, l2 in kids:
            old = live.get(id(ch))
            live[id(ch)] = l2 if old is None else (old | l2)
            stack.append(ch)
    return live


def fold(s, ops, stats: DPStats | None = None, stop_on_empty=True):
    """Evaluate ``ops`` bottom-up over ``s``.

    ``ops`` provides leaf(node), union(a, b), add(a, role, i, j) and relabel(a, i, j);
    each returns a set-like Theta value. An optional forget(value, live, node)
    may discard information about labels outside ``live``. Children's values are released as soon as
    their parent is computed. An empty value propagates to the root unchanged, so
    with ``stop_on_empty`` the fold returns early.
    """
    stats = stats if stats is not None else DPStats()
    t0 = time.perf_counter()
    vals = {}
    root_id = id(s)
    forget = getattr(ops, "forget", None)
    live = live_labels(s) if forget is not None else None
    height = {}
    for node in postorder(s):
        h = height[id(node)] = 1 + max((height[id(c)] for c in node.children), default=-1)
        if isinstance(node, Intro):
            v, kind = ops.leaf(node), "intro"
        elif isinstance(node, Union):
            a = vals.pop(id(node.left))
            b = vals.pop(id(node.right))
            v, kind = ops.union(a, b), "union"
        elif isinstance(node, AddRole):
            v, kind = ops.add(vals.pop(id(node.child)), node.role, node.src, node.dst), "add"
        elif isinstance(node, Relabel):
            v, kind = ops.relabel(vals.pop(id(node.child)), node.src, node.dst), "relabel"
        else:
            raise ValidationError("unknown node %r" % (node,))
        if forget is not None:
            v = forget(v, live[id(node)], node)
        stats.note(kind, len(v), h)
        if not v and stop_on_empty and id(node) != root_id:
            stats.early_exit = True
            stats.seconds = time.perf_counter() - t0
            return v, stats
        vals[id(node)] = v
    stats.seconds = time.perf_counter() - t0
    return vals[root_id], stats


def max_label(s) -> int:
    k = 1
    for node in postorder(s):
        if isinstance(node, Intro):
            k = max(k, node.label)
        elif isinstance(node, (AddRole, Relabel)):
            k = max(k, node.src, node.dst)
    return k


def antichain(items, dominates):
    """Items not strictly dominated by another item (first of equal ones kept)."""
    items = list(items)
    keep = []
    for x in items:
        if any(dominates(y, x) for y in keep):
            continue
        keep = [y for y in keep if not dominates(x, y)]
        keep.append(x)
    return keep
