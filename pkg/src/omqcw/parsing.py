"""Readers for the text formats: .onto, .db, .q, .kx and .td files."""
from __future__ import annotations

import re

from .errors import DialectError, ParseError
from .syntax import (BOT, CQ, TOP, Atom, Database, Formula, Ontology, Role, UCQ,
                     cname, conj, disj, eq_exists, exists, fand, feq, fexists, fforall,
                     fiff, fimp, fnot, forall, free_vars, f_or, has_inverse, is_reserved, neg)

IDENT = re.compile(r"[A-Za-z_@][A-Za-z0-9_@#\-']*")
NAME = re.compile(r"[A-Za-z_@][A-Za-z0-9_@#']*")
DIALECTS = ("ALC", "ALCI", "GF2")


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


# ---------------------------------------------------------------- s-expressions

class SExpr(list):
    """A parenthesised list remembering where it started."""
    line = 0
    col = 0


class Sym(str):
    line = 0
    col = 0


def read_sexprs(text: str, source=None) -> list:
    """Read all top-level s-expressions. Iterative so deep nesting is fine."""
    out = []
    stack = []
    tok = re.compile(r"\s+|;[^\n]*|#[^\n]*|\(|\)|[^\s()]+")
    line, line_start = 1, 0
    pos = 0
    n = len(text)
    while pos < n:
        m = tok.match(text, pos)
        s = m.group(0)
        col = pos - line_start + 1
        if s == "(":
            e = SExpr()
            e.line, e.col = line, col
            stack.append(e)
        elif s == ")":
            if not stack:
                raise ParseError("unbalanced ')'", line, col, source)
            e = stack.pop()
            (stack[-1] if stack else out).append(e)
        elif s[0].isspace() or s[0] in ";#":
            pass
        else:
            sym = Sym(s)
            sym.line, sym.col = line, col
            (stack[-1] if stack else out).append(sym)
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = pos + s.rfind("\n") + 1
        pos = m.end()
    if stack:
        raise ParseError("unclosed '('", stack[-1].line, stack[-1].col, source)
    return out


def _where(e):
    return getattr(e, "line", None), getattr(e, "col", None)


# ---------------------------------------------------------------- concepts

class _ConceptReader:
    def __init__(self, text, line, source, allow_reserved):
        self.text = text
        self.pos = 0
        self.line = line
        self.source = source
        self.allow_reserved = allow_reserved

    def err(self, msg):
        raise ParseError(msg, self.line, self.pos + 1, self.source)

    def ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, s):
        self.ws()
        return self.text.startswith(s, self.pos)

    def expect(self, s):
        if not self.peek(s):
            self.err("expected %r" % s)
        self.pos += len(s)

    def name(self):
        self.ws()
        m = NAME.match(self.text, self.pos)
        if not m:
            self.err("expected a name")
        self.pos = m.end()
        n = m.group(0)
        if is_reserved(n) and not self.allow_reserved:
            self.err("reserved name %r" % n)
        return n

    def role(self):
        n = self.name()
        inv = False
        if self.peek("-"):
            self.pos += 1
            inv = True
        return Role(n, inv)

    def expr(self):
        left = self.conj_expr()
        parts = [left]
        while self.peek("|"):
            self.pos += 1
            parts.append(self.conj_expr())
        return parts[0] if len(parts) == 1 else disj(*parts)

    def conj_expr(self):
        parts = [self.unary()]
        while self.peek("&"):
            self.pos += 1
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else conj(*parts)

    def unary(self):
        self.ws()
        if self.peek("~"):
            self.pos += 1
            return neg(self.unary())
        if self.peek("("):
            self.pos += 1
            c = self.expr()
            self.expect(")")
            return c
        if self.peek("<"):
            self.pos += 1
            r = self.role()
            self.expect(">")
            self.expect(".")
            if self.peek("["):
                self.pos += 1
                names = []
                if not self.peek("]"):
                    names.append(self.name())
                    while self.peek(","):
                        self.pos += 1
                        names.append(self.name())
                self.expect("]")
                self.expect("=")
                return eq_exists(r, names)
            return exists(r, self.unary())
        if self.peek("["):
            self.pos += 1
            r = self.role()
            self.expect("]")
            self.expect(".")
            return forall(r, self.unary())
        n = self.name()
        if n == "top":
            return TOP
        if n == "bot":
            return BOT
        return cname(n)

    def done(self):
        self.ws()
        if self.pos != len(self.text):
            self.err("unexpected trailing input")


def parse_concept(text: str, allow_reserved=False):
    r = _ConceptReader(text, 1, None, allow_reserved)
    c = r.expr()
    r.done()
    return c


# ---------------------------------------------------------------- GF2 formulas

def _is_sym(e, *vals):
    return isinstance(e, str) and (not vals or e in vals)


def sexpr_to_formula(e, source=None, allow_reserved=False, arities=None) -> Formula:
    """Convert an s-expression to a guarded formula, validating the guard discipline."""
    arities = {} if arities is None else arities

    def err(msg, node):
        ln, col = _where(node)
        raise DialectError(msg, ln, col, source)

    def atom(node, allow_eq):
        head = node[0]
        if head == "=":
            if not allow_eq:
                err("equality is only allowed as a guard", node)
            if len(node) != 3:
                err("equality takes two variables", node)
            for v in node[1:]:
                if v not in ("x", "y"):
                    err("only variables x and y are allowed", node)
            return feq(node[1], node[2])
        pred = str(head)
        if not NAME.fullmatch(pred):
            err("bad predicate %r" % pred, node)
        if is_reserved(pred) and not allow_reserved:
            err("reserved name %r" % pred, node)
        args = node[1:]
        if not 1 <= len(args) <= 2:
            err("relation arity must be 1 or 2", node)
        for v in args:
            if not _is_sym(v, "x", "y"):
                err("only variables x and y are allowed", node)
        if arities.setdefault(pred, len(args)) != len(args):
            err("inconsistent arity for %r" % pred, node)
        return Formula("atom", pred=pred, vars=tuple(str(v) for v in args))

    def conv(node, allow_eq=False):
        if isinstance(node, str):
            if node == "true":
                return Formula("true")
            if node == "false":
                return Formula("false")
            err("unexpected symbol %r" % str(node), node)
        if not node:
            err("empty expression", node)
        head = node[0]
        if not isinstance(head, str):
            err("expected an operator", node)
        if head in ("forall", "exists"):
            return quant(node)
        if head == "not":
            if len(node) != 2:
                err("'not' takes one argument", node)
            return fnot(conv(node[1]))
        if head in ("and", "or"):
            args = [conv(a) for a in node[1:]]
            return fand(*args) if head == "and" else f_or(*args)
        if head == "->":
            if len(node) != 3:
                err("'->' takes two arguments", node)
            return fimp(conv(node[1]), conv(node[2]))
        if head == "<->":
            if len(node) != 3:
                err("'<->' takes two arguments", node)
            return fiff(conv(node[1]), conv(node[2]))
        return atom(node, allow_eq)

    def quant(node):
        op = str(node[0])
        vs = []
        cur = node
        while isinstance(cur, list) and cur and cur[0] == op:
            if len(cur) != 3 or not _is_sym(cur[1], "x", "y"):
                err("quantifier syntax is (%s v body)" % op, cur)
            if cur[1] in vs:
                err("variable quantified twice", cur)
            vs.append(str(cur[1]))
            cur = cur[2]
        want = "->" if op == "forall" else "and"
        if not (isinstance(cur, list) and len(cur) >= 3 and cur[0] == want) or (
                want == "->" and len(cur) != 3):
            err("unguarded quantifier: expected (%s guard body)" % want, cur if isinstance(cur, list) else node)
        g = cur[1]
        if not isinstance(g, list) or not g or g[0] in ("forall", "exists", "and", "or", "not", "->", "<->"):
            err("guard must be an atom or an equality", cur)
        guard = atom(g, True)
        if len(cur) == 3:
            body = conv(cur[2])
        else:
            body = fand(*[conv(a) for a in cur[2:]])
        needed = set(free_vars(body)) | set(vs)
        if not needed <= set(guard.vars):
            err("guard does not cover all variables", cur)
        return (fforall if op == "forall" else fexists)(vs, guard, body)

    return conv(e)


def parse_formula(text: str, allow_reserved=False) -> Formula:
    es = read_sexprs(text)
    if len(es) != 1:
        raise ParseError("expected a single formula")
    return sexpr_to_formula(es[0], allow_reserved=allow_reserved)


# ---------------------------------------------------------------- ontologies

def parse_ontology(text: str, dialect: str | None = None, source=None,
                   allow_reserved=False) -> Ontology:
    """Parse an ontology file. The dialect comes from a ``dialect`` line, the
    argument, or is inferred (GF2 when sentences appear, ALCI if an inverse role
    appears, ALC otherwise)."""
    cis = []
    sent_lines = []
    declared = dialect
    for ln, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        words = line.split()
        if words[0] == "dialect":
            if len(words) != 2 or words[1].upper() not in DIALECTS:
                raise ParseError("dialect must be one of ALC, ALCI, GF2", ln, 1, source)
            d = words[1].upper()
            if declared is not None and declared != d:
                raise DialectError("conflicting dialect %s (expected %s)" % (d, declared), ln, 1, source)
            declared = d
            continue
        if words[0] in ("func", "funct", "functional"):
            raise DialectError("functionality assertions are not supported", ln, 1, source)
        if "<=" in line or "==" in line:
            op = "==" if "==" in line and "<=" not in line else "<="
            lhs, _, rhs = line.partition(op)
            l = _ConceptReader(lhs, ln, source, allow_reserved)
            lc = l.expr()
            l.done()
            r = _ConceptReader(rhs, ln, source, allow_reserved)
            r.pos = 0
            rc = r.expr()
            r.done()
            cis.append((lc, rc))
            if op == "==":
                cis.append((rc, lc))
            continue
        if line.startswith("("):
            sent_lines.append((ln, raw))
            continue
        raise ParseError("expected a concept inclusion 'C <= D' or a sentence", ln, 1, source)

    sentences = []
    if sent_lines:
        body = "\n" * (sent_lines[0][0] - 1)
        prev = sent_lines[0][0]
        chunks = [body]
        for ln, raw in sent_lines:
            chunks.append("\n" * (ln - prev) + _strip_comment(raw))
            prev = ln
        arities: dict = {}
        for e in read_sexprs("".join(chunks), source):
            f = sexpr_to_formula(e, source, allow_reserved, arities)
            if free_vars(f):
                ln, col = _where(e)
                raise DialectError("sentence has free variables", ln, col, source)
            sentences.append(f)

    if sentences and cis:
        raise DialectError("an ontology mixes concept inclusions and GF2 sentences", None, None, source)
    if declared is None:
        if sentences:
            declared = "GF2"
        elif any(has_inverse(l) or has_inverse(r) for l, r in cis):
            declared = "ALCI"
        else:
            declared = "ALC"
    if declared == "GF2" and cis:
        raise DialectError("GF2 ontologies contain sentences only", None, None, source)
    if declared in ("ALC", "ALCI") and sentences:
        raise DialectError("%s ontologies contain concept inclusions only" % declared, None, None, source)
    if declared == "ALC":
        for l, r in cis:
            if has_inverse(l) or has_inverse(r):
                raise DialectError("inverse role in an ALC ontology", None, None, source)
    return Ontology(declared, cis, sentences)


# ---------------------------------------------------------------- databases and queries

FACT = re.compile(r"\s*([A-Za-z_@][A-Za-z0-9_@#']*)\s*\(\s*([^()]*?)\s*\)\s*")


def _parse_atom_text(s: str, ln, source, what="atom"):
    m = FACT.fullmatch(s)
    if not m:
        raise ParseError("malformed %s %r" % (what, s.strip()), ln, 1, source)
    pred = m.group(1)
    args = tuple(a.strip() for a in m.group(2).split(",")) if m.group(2) else ()
    if not 1 <= len(args) <= 2 or not all(NAME.fullmatch(a) for a in args):
        raise ParseError("malformed %s %r" % (what, s.strip()), ln, 1, source)
    return Atom(pred, args)


def parse_database(text: str, source=None) -> Database:
    facts = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip().rstrip(".")
        if not line:
            continue
        a = _parse_atom_text(line, ln, source, "fact")
        if a.pred.startswith("@"):
            raise ParseError("reserved name %r" % a.pred, ln, 1, source)
        facts.append(a)
    return Database(facts)


def parse_ground_atom(text: str) -> Atom:
    return _parse_atom_text(text, 1, None)


HEAD = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*\(\s*([^()]*?)\s*\)\s*:=(.*)")


def _split_atoms(body: str, ln, source):
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [_parse_atom_text(p, ln, source) for p in parts if p.strip()]


def parse_query(text: str, source=None, allow_reserved=False) -> UCQ:
    cqs = []
    answer = None
    for ln, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        m = HEAD.fullmatch(line)
        if not m:
            raise ParseError("expected 'q(x,...) := atom, ...'", ln, 1, source)
        head = tuple(a.strip() for a in m.group(2).split(",")) if m.group(2).strip() else ()
        if answer is None:
            answer = head
        elif head != answer:
            raise ParseError("all CQs of a UCQ must share the answer variables", ln, 1, source)
        if len(set(head)) != len(head):
            raise ParseError("repeated answer variable", ln, 1, source)
        atoms = _split_atoms(m.group(3), ln, source)
        if not atoms:
            raise ParseError("empty query body", ln, 1, source)
        for a in atoms:
            if is_reserved(a.pred) and not allow_reserved:
                raise ParseError("reserved name %r" % a.pred, ln, 1, source)
        vs = {v for a in atoms for v in a.args}
        missing = [v for v in head if v not in vs]
        if missing:
            raise ParseError("answer variable %s does not occur in an atom" % missing[0], ln, 1, source)
        cqs.append(CQ(frozenset(atoms), head))
    if not cqs:
        raise ParseError("no query found", None, None, source)
    return UCQ(tuple(cqs), answer)


def query_text(q: UCQ) -> str:
    return "".join("q(%s) := %s\n" % (",".join(q.answer), ", ".join(str(a) for a in sorted(c.atoms)))
                   for c in q.cqs)


# ---------------------------------------------------------------- tree decompositions

def parse_td(text: str, source=None):
    """Returns (bags: dict id -> frozenset, edges: list, root or None)."""
    bags, edges, root = {}, [], None
    for ln, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line or line.startswith("c ") or line == "c":
            continue
        w = line.split()
        if w[0] == "s":
            continue
        if w[0] == "b" and len(w) >= 2:
            if w[1] in bags:
                raise ParseError("duplicate bag id %s" % w[1], ln, 1, source)
            bags[w[1]] = frozenset(w[2:])
        elif w[0] == "e" and len(w) == 3:
            edges.append((w[1], w[2]))
        elif w[0] == "r" and len(w) == 2:
            root = w[1]
        else:
            raise ParseError("expected 'b', 'e' or 'r' line", ln, 1, source)
    return bags, edges, root
