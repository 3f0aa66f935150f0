"""k-expressions: syntax, evaluation, validation, file format and generators."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError, ValidationError
from .parsing import read_sexprs
from .syntax import Atom, Database, is_label, label_pred


class KExpr:
    """Base class. Nodes compare by identity, so shared subtrees are allowed."""
    __slots__ = ()
    children: tuple = ()


class Intro(KExpr):
    __slots__ = ("label", "const", "facts")

    def __init__(self, label: int, const: str, facts=()):
        self.label = label
        self.const = const
        self.facts = tuple(facts)

    @property
    def children(self):
        return ()

    def database(self) -> Database:
        return Database(self.facts + (Atom(label_pred(self.label), (self.const,)),))

    def __repr__(self):
        return "Intro(%d, %s, %s)" % (self.label, self.const, list(map(str, self.facts)))


class Union(KExpr):
    __slots__ = ("left", "right")

    def __init__(self, left: KExpr, right: KExpr):
        self.left, self.right = left, right

    @property
    def children(self):
        return (self.left, self.right)


class AddRole(KExpr):
    __slots__ = ("role", "src", "dst", "child")

    def __init__(self, role: str, src: int, dst: int, child: KExpr):
        self.role, self.src, self.dst, self.child = role, src, dst, child

    @property
    def children(self):
        return (self.child,)


class Relabel(KExpr):
    __slots__ = ("src", "dst", "child")

    def __init__(self, src: int, dst: int, child: KExpr):
        self.src, self.dst, self.child = src, dst, child

    @property
    def children(self):
        return (self.child,)


def union_all(parts):
    """Left-deep union of a non-empty sequence."""
    it = iter(parts)
    acc = next(it)
    for p in it:
        acc = Union(acc, p)
    return acc


def add_sym(role, i, j, s):
    return AddRole(role, j, i, AddRole(role, i, j, s))


def postorder(root: KExpr):
    """Nodes in child-before-parent order, iteratively."""
    out = []
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            out.append(node)
            continue
        stack.append((node, True))
        for c in reversed(node.children):
            stack.append((c, False))
    return out


def leaves(root: KExpr):
    return [n for n in postorder(root) if isinstance(n, Intro)]


# ---------------------------------------------------------------- evaluation

class _Acc:
    __slots__ = ("labels", "facts", "adom")

    def __init__(self):
        self.labels = {}
        self.facts = []
        self.adom = set()


def _run(root: KExpr, strict: bool, violations: list | None = None):
    results = {}
    for node in postorder(root):
        if isinstance(node, Intro):
            a = _Acc()
            for f in node.facts:
                if is_label(f.pred) or any(x != node.const for x in f.args):
                    msg = "malformed intro payload for %s: %s" % (node.const, f)
                    if strict:
                        raise ValidationError(msg)
                    violations.append(msg)
            a.labels[node.label] = {node.const}
            a.facts = list(node.facts)
            a.adom = {node.const}
        elif isinstance(node, Union):
            x = results.pop(id(node.left))
            y = results.pop(id(node.right))
            if len(x.adom) < len(y.adom):
                x, y = y, x
            common = x.adom & y.adom
            if common:
                msg = "union of non-disjoint databases (shared %s)" % sorted(common)[0]
                if strict:
                    raise ValidationError(msg)
                violations.append(msg)
            x.adom |= y.adom
            x.facts.extend(y.facts)
            for lab, cs in y.labels.items():
                mine = x.labels.get(lab)
                if mine is None:
                    x.labels[lab] = cs
                elif len(mine) < len(cs):
                    cs |= mine
                    x.labels[lab] = cs
                else:
                    mine |= cs
            a = x
        elif isinstance(node, AddRole):
            a = results.pop(id(node.child))
            srcs = a.labels.get(node.src, ())
            dsts = a.labels.get(node.dst, ())
            r = node.role
            a.facts.extend(Atom(r, (u, v)) for u in srcs for v in dsts)
        elif isinstance(node, Relabel):
            a = results.pop(id(node.child))
            moved = a.labels.pop(node.src, None)
            if moved:
                tgt = a.labels.get(node.dst)
                if tgt is None:
                    a.labels[node.dst] = moved
                elif len(tgt) < len(moved):
                    moved |= tgt
                    a.labels[node.dst] = moved
                else:
                    tgt |= moved
        else:
            raise ValidationError("unknown k-expression node %r" % (node,))
        results[id(node)] = a
    return results[id(root)]


def eval_kexpr(s: KExpr, with_labels=True) -> Database:
    a = _run(s, True)
    facts = list(a.facts)
    if with_labels:
        facts += [Atom(label_pred(l), (c,)) for l, cs in a.labels.items() for c in cs]
    return Database(facts)


def final_labels(s: KExpr) -> dict:
    """Map constant -> label at the root."""
    a = _run(s, True)
    return {c: l for l, cs in a.labels.items() for c in cs}


@dataclass
class KExprReport:
    valid: bool
    width: int
    subexpressions: int
    leaves: int
    violations: list = field(default_factory=list)

    def to_dict(self):
        return {"valid": self.valid, "width": self.width, "subexpressions": self.subexpressions,
                "leaves": self.leaves, "violations": list(self.violations)}


def validate_kexpr(s: KExpr, k: int | None = None) -> KExprReport:
    violations = []
    width = 0
    nodes = postorder(s)
    nleaves = 0
    for node in nodes:
        labs = ()
        if isinstance(node, Intro):
            nleaves += 1
            labs = (node.label,)
        elif isinstance(node, AddRole):
            labs = (node.src, node.dst)
            if node.src == node.dst:
                violations.append("add-role with equal labels %d" % node.src)
        elif isinstance(node, Relabel):
            labs = (node.src, node.dst)
            if node.src == node.dst:
                violations.append("relabel with equal labels %d" % node.src)
        for l in labs:
            if not isinstance(l, int) or l < 1:
                violations.append("label %r is not a positive integer" % (l,))
            else:
                width = max(width, l)
                if k is not None and l > k:
                    violations.append("label L%d exceeds bound k=%d" % (l, k))
    try:
        _run(s, False, violations)
    except ValidationError as e:
        violations.append(str(e))
    return KExprReport(not violations, width, len(nodes), nleaves, violations)


def kexpr_matches(s: KExpr, db: Database) -> bool:
    return eval_kexpr(s, with_labels=False).without_labels() == db.without_labels()


def kexpr_width(s: KExpr) -> int:
    return validate_kexpr(s).width


def add_unary_to_leaf(s: KExpr, const: str, facts) -> KExpr:
    """Copy of ``s`` where the intro leaf of ``const`` carries extra unary facts."""
    facts = tuple(facts)
    memo = {}
    found = False
    for node in postorder(s):
        if isinstance(node, Intro):
            if node.const == const:
                found = True
                new = Intro(node.label, node.const, node.facts + tuple(
                    f for f in facts if f not in node.facts))
            else:
                new = node
        elif isinstance(node, Union):
            l, r = memo[id(node.left)], memo[id(node.right)]
            new = node if (l is node.left and r is node.right) else Union(l, r)
        elif isinstance(node, AddRole):
            c = memo[id(node.child)]
            new = node if c is node.child else AddRole(node.role, node.src, node.dst, c)
        else:
            c = memo[id(node.child)]
            new = node if c is node.child else Relabel(node.src, node.dst, c)
        memo[id(node)] = new
    if not found:
        raise ValidationError("constant %s is not introduced by the expression" % const)
    return memo[id(s)]


def rename_roles(s: KExpr, mapping: dict) -> KExpr:
    memo = {}
    for node in postorder(s):
        if isinstance(node, Intro):
            new = Intro(node.label, node.const,
                        [Atom(mapping.get(f.pred, f.pred), f.args) if len(f.args) == 2 else f
                         for f in node.facts])
        elif isinstance(node, Union):
            new = Union(memo[id(node.left)], memo[id(node.right)])
        elif isinstance(node, AddRole):
            new = AddRole(mapping.get(node.role, node.role), node.src, node.dst, memo[id(node.child)])
        else:
            new = Relabel(node.src, node.dst, memo[id(node.child)])
        memo[id(node)] = new
    return memo[id(s)]


# ---------------------------------------------------------------- file format

def _int_label(tok, node):
    try:
        v = int(tok)
    except (TypeError, ValueError):
        raise ParseError("expected a label number, got %r" % (tok,), node.line, node.col) from None
    return v


def parse_kexpr(text: str, source=None) -> KExpr:
    es = read_sexprs(text, source)
    if len(es) != 1:
        raise ParseError("expected exactly one k-expression", None, None, source)
    root = es[0]
    # iterative conversion: post-order over the s-expression tree
    memo = {}
    stack = [(root, False)]
    while stack:
        e, done = stack.pop()
        if not isinstance(e, list) or not e:
            raise ParseError("expected a parenthesised operator", getattr(e, "line", None),
                             getattr(e, "col", None), source)
        head = e[0]
        if head == "intro":
            if len(e) < 3 or not isinstance(e[2], str):
                raise ParseError("intro syntax is (intro LABEL CONST FACT...)", e.line, e.col, source)
            lab = _int_label(e[1], e)
            c = str(e[2])
            facts = []
            for f in e[3:]:
                if not isinstance(f, list) or not 2 <= len(f) <= 3 or any(not isinstance(x, str) for x in f):
                    raise ParseError("malformed intro fact", e.line, e.col, source)
                facts.append(Atom(str(f[0]), tuple(str(x) for x in f[1:])))
            memo[id(e)] = Intro(lab, c, facts)
            continue
        if head == "union":
            kids = e[1:]
        elif head in ("add", "relabel"):
            kids = e[-1:]
        else:
            raise ParseError("unknown operator %r" % (head,), e.line, e.col, source)
        if not done:
            stack.append((e, True))
            for k in kids:
                stack.append((k, False))
            continue
        if head == "union":
            if len(kids) < 2:
                raise ParseError("union needs at least two arguments", e.line, e.col, source)
            memo[id(e)] = union_all([memo.pop(id(k)) for k in kids])
        elif head == "add":
            if len(e) != 5:
                raise ParseError("add syntax is (add ROLE I J EXPR)", e.line, e.col, source)
            memo[id(e)] = AddRole(str(e[1]), _int_label(e[2], e), _int_label(e[3], e), memo.pop(id(e[4])))
        else:
            if len(e) != 4:
                raise ParseError("relabel syntax is (relabel I J EXPR)", e.line, e.col, source)
            memo[id(e)] = Relabel(_int_label(e[1], e), _int_label(e[2], e), memo.pop(id(e[3])))
    return memo[id(root)]


def kexpr_text(s: KExpr) -> str:
    out = {}
    for node in postorder(s):
        if isinstance(node, Intro):
            fs = "".join(" (%s %s)" % (f.pred, " ".join(f.args)) for f in node.facts)
            t = "(intro %d %s%s)" % (node.label, node.const, fs)
        elif isinstance(node, Union):
            t = "(union %s %s)" % (out.pop(id(node.left)), out.pop(id(node.right)))
        elif isinstance(node, AddRole):
            t = "(add %s %d %d %s)" % (node.role, node.src, node.dst, out.pop(id(node.child)))
        else:
            t = "(relabel %d %d %s)" % (node.src, node.dst, out.pop(id(node.child)))
        out[id(node)] = t
    return out[id(s)] + "\n"


# ---------------------------------------------------------------- generators

def school_example() -> tuple:
    """The hand-built database with two pupils, a teacher and a school, and its 3-expression."""
    d1 = Intro(1, "a1", [Atom("Pupil", ("a1",))])
    d2 = Intro(2, "a2", [Atom("Pupil", ("a2",))])
    d3 = Intro(2, "b", [Atom("Teacher", ("b",))])
    d4 = Intro(3, "c", [Atom("School", ("c",))])
    pupils = Relabel(2, 1, AddRole("isClassmateOf", 2, 1, AddRole("isClassmateOf", 1, 2, Union(d1, d2))))
    s = AddRole("worksAt", 2, 3, Union(AddRole("teaches", 2, 1, Union(pupils, d3)), d4))
    db = Database([
        Atom("Pupil", ("a1",)), Atom("Pupil", ("a2",)), Atom("Teacher", ("b",)),
        Atom("School", ("c",)), Atom("worksAt", ("b", "c")), Atom("teaches", ("b", "a1")),
        Atom("teaches", ("b", "a2")), Atom("isClassmateOf", ("a1", "a2")),
        Atom("isClassmateOf", ("a2", "a1"))])
    return db, s


def _pupil_group(names):
    """Classmate clique on label 1, built one pupil at a time with label 2 as scratch."""
    acc = Intro(1, names[0], [Atom("Pupil", (names[0],))])
    for p in names[1:]:
        acc = Union(acc, Intro(2, p, [Atom("Pupil", (p,))]))
        acc = Relabel(2, 1, add_sym("isClassmateOf", 1, 2, acc))
    return acc


def gen_school(n_s: int, n_t: int, pupils, w) -> tuple:
    """School database and a 3-expression for it.

    Teacher i (1-based) teaches ``pupils[i-1]`` classmates and works at school ``w[i-1]``.
    """
    pupils = list(pupils)
    w = list(w)
    if n_t < 1 or n_s < 1:
        raise ValidationError("need at least one school and one teacher")
    if len(pupils) != n_t or len(w) != n_t:
        raise ValidationError("pupil counts and assignment must have one entry per teacher")
    if set(w) != set(range(1, n_s + 1)):
        raise ValidationError("teacher assignment must be surjective onto the schools")
    if any(n < 0 for n in pupils):
        raise ValidationError("negative pupil count")
    facts = []
    per_school = {i: [] for i in range(1, n_s + 1)}
    for i in range(1, n_t + 1):
        t = "t%d" % i
        names = ["p%d_%d" % (i, j) for j in range(1, pupils[i - 1] + 1)]
        facts.append(Atom("Teacher", (t,)))
        facts.append(Atom("worksAt", (t, "s%d" % w[i - 1])))
        for p in names:
            facts += [Atom("Pupil", (p,)), Atom("teaches", (t, p))]
            facts += [Atom("isClassmateOf", (p, o)) for o in names if o != p]
        teacher = Intro(2, t, [Atom("Teacher", (t,))])
        if names:
            # pupils on 1, teacher on 2; then park the pupils on 3
            grp = Relabel(1, 3, AddRole("teaches", 2, 1, Union(_pupil_group(names), teacher)))
        else:
            grp = teacher
        per_school[w[i - 1]].append(grp)
    parts = []
    for sc in range(1, n_s + 1):
        s = "s%d" % sc
        facts.append(Atom("School", (s,)))
        e = AddRole("worksAt", 2, 1, Union(union_all(per_school[sc]), Intro(1, s, [Atom("School", (s,))])))
        parts.append(Relabel(1, 3, Relabel(2, 3, e)))
    return Database(facts), union_all(parts)


def school_chain(n_groups: int, pupils_per_group: int = 3, teachers_per_school: int = 2):
    n_t = n_groups
    n_s = max(1, (n_t + teachers_per_school - 1) // teachers_per_school)
    w = [min(n_s, i // teachers_per_school + 1) for i in range(n_t)]
    return gen_school(n_s, n_t, [pupils_per_group] * n_t, w)


def vertex(label, v):
    return Intro(label, v, [Atom("top", (v,))])


def clique2(names, role="edge"):
    """Clique on label 1 via repeated joins; scratch label 2."""
    acc = vertex(1, names[0])
    for v in names[1:]:
        acc = Relabel(2, 1, add_sym(role, 1, 2, Union(acc, vertex(2, v))))
    return acc


def join2(x: KExpr, y: KExpr, role="edge") -> KExpr:
    """All edges between two label-1 databases; result again on label 1."""
    return Relabel(2, 1, add_sym(role, 1, 2, Union(x, Relabel(1, 2, y))))


def graph_database(vertices, edges, role="edge") -> Database:
    facts = [Atom("top", (v,)) for v in vertices]
    for u, v in edges:
        facts += [Atom(role, (u, v)), Atom(role, (v, u))]
    return Database(facts)


def gen_two_cliques(n: int, m: int, overlap: int, role="edge"):
    """Two cliques of sizes n and m sharing ``overlap`` vertices, with a 2-expression."""
    if overlap > min(n, m) or min(n, m) < 0:
        raise ValidationError("overlap exceeds clique size")
    a_only = ["a%d" % i for i in range(n - overlap)]
    shared = ["s%d" % i for i in range(overlap)]
    b_only = ["b%d" % i for i in range(m - overlap)]
    verts = a_only + shared + b_only
    if not verts:
        raise ValidationError("empty graph")
    A = set(a_only) | set(shared)
    B = set(b_only) | set(shared)
    edges = [(u, v) for i, u in enumerate(verts) for v in verts[i + 1:]
             if (u in A and v in A) or (u in B and v in B)]
    sides = [clique2(x, role) for x in (a_only, b_only) if x]
    rest = union_all(sides) if sides else None
    if shared:
        core = clique2(shared, role)
        expr = core if rest is None else join2(core, rest, role)
    else:
        expr = rest
    db = Database([Atom(role, (u, v)) for u, v in edges] + [Atom(role, (v, u)) for u, v in edges]
                  + [Atom("top", (v,)) for v in verts])
    return db, expr


def kexpr_for_database(db: Database, order=None) -> KExpr:
    """A k-expression for any database: constants are introduced one by one in ``order``.

    Each constant keeps a private label while it still has role facts to later
    constants and is then parked on label 1. The width is one plus the largest
    number of simultaneously open constants.
    """
    db = db.without_labels()
    consts = list(order) if order is not None else sorted(db.adom)
    if set(consts) != set(db.adom) or len(consts) != len(db.adom):
        raise ValidationError("order must list every constant exactly once")
    if not consts:
        raise ValidationError("empty database has no k-expression")
    pos = {c: i for i, c in enumerate(consts)}
    last = {c: pos[c] for c in consts}
    edges = {}
    for f in db.facts:
        if len(f.args) == 2 and f.args[0] != f.args[1]:
            a, b = f.args
            last[a] = max(last[a], pos[b])
            last[b] = max(last[b], pos[a])
            edges.setdefault(max(pos[a], pos[b]), []).append(f)
    free, label, acc = [], {}, None
    next_label = 2
    for i, c in enumerate(consts):
        if free:
            lab = free.pop()
        else:
            lab, next_label = next_label, next_label + 1
        label[c] = lab
        own = [f for f in db.facts if set(f.args) == {c}]
        node = Intro(lab, c, sorted(own))
        acc = node if acc is None else Union(acc, node)
        for f in sorted(edges.get(i, ())):
            acc = AddRole(f.pred, label[f.args[0]], label[f.args[1]], acc)
        for d in consts[:i + 1]:
            if d in label and last[d] <= i:
                acc = Relabel(label[d], 1, acc)
                free.append(label.pop(d))
        free.sort(reverse=True)
    return acc


def cograph_expression(vertices, edges, role="edge") -> KExpr:
    """A 2-expression for a cograph (every graph of cliquewidth at most 2 is one).

    Disconnected graphs are unions of their components; connected ones are
    joins of the components of their complement. Raises ValidationError when
    neither split applies.
    """
    vertices = sorted(set(vertices))
    if not vertices:
        raise ValidationError("empty graph")
    adj = {v: set() for v in vertices}
    for u, v in edges:
        if u == v:
            continue
        if u not in adj or v not in adj:
            raise ValidationError("edge %s-%s uses an unknown vertex" % (u, v))
        adj[u].add(v)
        adj[v].add(u)

    def components(vs, nbrs):
        left, out = set(vs), []
        while left:
            start = min(left)
            comp, todo = {start}, [start]
            while todo:
                x = todo.pop()
                for y in nbrs(x):
                    if y in left and y not in comp:
                        comp.add(y)
                        todo.append(y)
            left -= comp
            out.append(sorted(comp))
        return out

    def build(vs):
        if len(vs) == 1:
            return vertex(1, vs[0])
        sv = set(vs)
        parts = components(vs, lambda x: adj[x] & sv)
        if len(parts) > 1:
            return union_all([build(p) for p in parts])
        co = components(vs, lambda x: sv - adj[x] - {x})
        if len(co) == 1:
            raise ValidationError("the graph is not a cograph, so it has no 2-expression")
        acc = build(co[0])
        for p in co[1:]:
            acc = join2(acc, build(p), role)
        return acc

    return build(vertices)
