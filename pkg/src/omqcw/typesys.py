"""Type elimination for ALCI ontologies and for GF2 ontologies (1-types and 2-types)."""
from __future__ import annotations


from . import boolexpr as bx
from .normal import closures, ontology_concept
from .syntax import (TOP_PRED, Concept, Database, Formula, Ontology, Role, cname, concept_str,
                     formula_preds, formula_str, free_vars, is_label, swap_xy)

MAX_CANDIDATES = 400_000


# ================================================================ ALCI

class AlciTypes:
    """Surviving types of a normalized ALCI ontology, as bitmasks over ``cl``."""

    def __init__(self, o: Ontology, max_candidates: int = MAX_CANDIDATES):
        self.ontology = o
        self.concept = ontology_concept(o)
        cs = closures(o)
        self.cl = list(cs.cl)
        self.idx = {c: i for i, c in enumerate(self.cl)}
        self.cl_all = list(cs.cl_all)
        self.cl_star = list(cs.cl_star)
        names = sorted({c.name for c in self.cl if c.op == "name"})
        exs = [c for c in self.cl if c.op == "ex"]
        self.base = [("name", n) for n in names] + [("ex", c) for c in exs]
        bidx = {b: i for i, b in enumerate(self.base)}
        self.name_cl = {n: self.idx[cname(n)] for n in names}

        def sym(c: Concept):
            op = c.op
            if op == "top":
                return True
            if op == "bot":
                return False
            if op == "name":
                return bx.var(bidx[("name", c.name)])
            if op == "not":
                return bx.bnot(sym(c.args[0]))
            if op == "and":
                return bx.band(*[sym(a) for a in c.args])
            if op == "or":
                return bx.bor(*[sym(a) for a in c.args])
            if op == "ex":
                return bx.var(bidx[("ex", c)])
            if op == "all":
                from .normal import nnf
                from .syntax import exists, neg
                return bx.bnot(bx.var(bidx[("ex", exists(c.role, nnf(neg(c.args[0]))))]))
            raise ValueError(op)

        self._sym = {c: sym(c) for c in self.cl}
        parts = " | ".join("(%s) << %d" % (bx.to_python(self._sym[c]) if self._sym[c] not in (True, False)
                                            else ("1" if self._sym[c] else "0"), i)
                           for i, c in enumerate(self.cl))
        self._expand = eval("lambda m: " + (parts or "0"))  # noqa: S307
        root = self._sym[self.concept] if self.concept in self._sym else True
        base_models = bx.models(root, len(self.base), limit=max_candidates)
        self.candidates = sorted({self._expand(m) for m in base_models})
        # role bookkeeping
        self.roles = sorted({c.role for c in self.cl if c.op in ("ex", "all")})
        self.all_by_role = {r: [(self.idx[c], self.idx[c.args[0]]) for c in self.cl_all if c.role == r]
                            for r in self.roles}
        self.exs = [(self.idx[c], c.role, self.idx[c.args[0]]) for c in exs]
        self.types = self._eliminate(self.candidates)
        self.type_set = frozenset(self.types)

    # -- helpers

    def contains(self, t: int, c: Concept) -> bool:
        i = self.idx.get(c)
        return i is not None and bool(t >> i & 1)

    def members(self, t: int):
        return [c for i, c in enumerate(self.cl) if t >> i & 1]

    def need(self, t: int, r: Role) -> int:
        m = 0
        for ai, ci in self.all_by_role.get(r, ()):
            if t >> ai & 1:
                m |= 1 << ci
        return m

    def _eliminate(self, cands):
        alive = set(cands)
        need_cache = {}
        back_cache = {}

        def need(t, r):
            k = (t, r)
            v = need_cache.get(k)
            if v is None:
                v = need_cache[k] = self.need(t, r)
            return v

        def back(t, r):
            k = (t, r)
            v = back_cache.get(k)
            if v is None:
                v = back_cache[k] = self.need(t, r.inverse())
            return v

        # a requirement (role, bits) of t is met by a live t2 containing the bits whose
        # inverse requirement lies inside t; live types are counted per role in groups
        # (bits any requirement mentions, inverse requirement)
        reqs = {}
        for t in alive:
            for ei, r, ci in self.exs:
                if t >> ei & 1:
                    reqs.setdefault((r, need(t, r) | (1 << ci)), []).append(t)
        mention = {}
        for r, nd in reqs:
            mention[r] = mention.get(r, 0) | nd
        groups = {r: {} for r in mention}
        back_bits = {r: 0 for r in mention}
        for t2 in alive:
            for r, m in mention.items():
                b = back(t2, r)
                back_bits[r] |= b
                g = groups[r]
                g[(t2 & m, b)] = g.get((t2 & m, b), 0) + 1
        memo = {r: {} for r in mention}

        def met(t, key):
            r, nd = key
            ck = (nd, t & back_bits[r])
            v = memo[r].get(ck)
            if v is None:
                v = memo[r][ck] = any(n and not nd & ~bits and not b & ~t
                                      for (bits, b), n in groups[r].items())
            return v

        work = [(t, key) for key, ts in reqs.items() for t in ts]
        while work:
            t, key = work.pop()
            if t not in alive or met(t, key):
                continue
            alive.discard(t)
            for r, m in mention.items():
                gk = (t & m, back(t, r))
                groups[r][gk] -= 1
                if groups[r][gk]:
                    continue
                memo[r].clear()
                for (r2, nd), ts in reqs.items():
                    if r2 == r and not nd & ~gk[0]:
                        work.extend((t3, (r2, nd)) for t3 in ts if t3 in alive)
        return sorted(alive)

    def realizes_leaf(self, t: int, facts, const) -> bool:
        """Whether type ``t`` can be the type of ``const`` given its intro facts."""
        for f in facts:
            if len(f.args) == 1:
                if f.pred == TOP_PRED:
                    continue
                i = self.name_cl.get(f.pred)
                if i is not None and not t >> i & 1:
                    return False
            elif f.args[0] == const and f.args[1] == const:
                for r in (Role(f.pred, False), Role(f.pred, True)):
                    for ai, ci in self.all_by_role.get(r, ()):
                        if t >> ai & 1 and not t >> ci & 1:
                            return False
        return True

    def type_strings(self):
        return [sorted(concept_str(c) for c in self.members(t)) for t in self.types]


def alci_types(o: Ontology) -> AlciTypes:
    return AlciTypes(o)


def type_realizes_leaf(table, t, leaf_db) -> bool:
    consts = sorted(leaf_db.adom)
    if len(consts) != 1:
        raise ValueError("leaf database must have exactly one constant")
    facts = [f for f in leaf_db.facts if not is_label(f.pred)]
    return table.realizes_leaf(t, facts, consts[0])


# ================================================================ GF2

class Gf2Types:
    """1-types, 2-types and compatibility for a GF2 ontology.

    A 1-type is a bitmask over ``base``: unary predicates, self-loops r(x,x),
    quantified formulas with free variable x, and sentences (the 0-type part).
    A 2-type is a triple (t1, M, t2) with M a bitmask over r(x,y)/r(y,x) atoms
    of the ontology's binary predicates.
    """

    def __init__(self, o: Ontology, max_candidates: int = MAX_CANDIDATES):
        if o.dialect != "GF2":
            raise ValueError("Gf2Types expects a GF2 ontology")
        self.ontology = o
        preds = {}
        for s in o.sentences:
            formula_preds(s, preds)
        self.unary = sorted(p for p, a in preds.items() if a == 1)
        self.roles = sorted(p for p, a in preds.items() if a == 2)
        quant1, sents = [], []
        seen1, seen0 = set(), set()

        def collect(f):
            stack = [f]
            while stack:
                g = stack.pop()
                if g.op in ("forall", "exists"):
                    fv = free_vars(g)
                    if not fv:
                        if g not in seen0:
                            seen0.add(g)
                            sents.append(g)
                    else:
                        c = g if "x" in fv else swap_xy(g)
                        if c not in seen1:
                            seen1.add(c)
                            quant1.append(c)
                stack.extend(g.args)

        for s in o.sentences:
            collect(s)
        self.quant1 = quant1
        self.sentences = sents
        base = [("u", p) for p in self.unary] + [("s", r) for r in self.roles]
        base += [("q", f) for f in quant1] + [("z", f) for f in sents]
        self.base = base
        self.bidx = {b: i for i, b in enumerate(base)}
        self.rbit = {r: j for j, r in enumerate(self.roles)}
        self.zero_mask = sum(1 << self.bidx[("z", f)] for f in sents)
        self.n_mbits = 2 * len(self.roles)
        self.all_M = list(range(1 << self.n_mbits))
        self._swapM = [self._swap_m(m) for m in self.all_M]
        self._valid_cache = {}
        self._compat_cache = {}
        self._build()
        base_models = bx.models(self.local, len(base), limit=max_candidates)
        self.candidates = sorted(base_models)
        self.types = self._eliminate(self.candidates)
        self.type_set = frozenset(self.types)

    # ---------------------------------------------------------- encoding helpers

    def _swap_m(self, m):
        out = 0
        for j in range(len(self.roles)):
            if m >> (2 * j) & 1:
                out |= 1 << (2 * j + 1)
            if m >> (2 * j + 1) & 1:
                out |= 1 << (2 * j)
        return out

    def swap_m(self, m):
        return self._swapM[m]

    def m_bit(self, role, forward=True):
        j = self.rbit.get(role)
        if j is None:
            return None
        return 2 * j + (0 if forward else 1)

    def _qbit(self, g: Formula):
        fv = free_vars(g)
        if not fv:
            return ("a", self.bidx[("z", g)])
        if fv == {"x"}:
            return ("a", self.bidx[("q", g)])
        return ("b", self.bidx[("q", swap_xy(g))])

    def sym_diag(self, f: Formula):
        """Value of ``f`` at one element with y identified with x, over base bits."""
        op = f.op
        if op == "true":
            return True
        if op == "false":
            return False
        if op == "atom":
            if len(f.vars) == 1:
                return bx.var(self.bidx[("u", f.pred)])
            return bx.var(self.bidx[("s", f.pred)])
        if op == "eq":
            return True
        if op == "not":
            return bx.bnot(self.sym_diag(f.args[0]))
        if op == "and":
            return bx.band(*[self.sym_diag(a) for a in f.args])
        if op == "or":
            return bx.bor(*[self.sym_diag(a) for a in f.args])
        _, i = self._qbit(f)
        return bx.var(i)

    def src2(self, f: Formula, a="a", m="m", b="b") -> str:
        """Python source evaluating ``f`` on a pair: x has type a, y has type b, edge set m."""
        op = f.op
        if op == "true":
            return "True"
        if op == "false":
            return "False"
        if op == "atom":
            if len(f.vars) == 1:
                v = a if f.vars[0] == "x" else b
                return "(%s >> %d & 1)" % (v, self.bidx[("u", f.pred)])
            u, w = f.vars
            if u == w:
                v = a if u == "x" else b
                return "(%s >> %d & 1)" % (v, self.bidx[("s", f.pred)])
            return "(%s >> %d & 1)" % (m, self.m_bit(f.pred, u == "x"))
        if op == "eq":
            return "True" if f.vars[0] == f.vars[1] else "False"
        if op == "not":
            return "(not %s)" % self.src2(f.args[0], a, m, b)
        if op in ("and", "or"):
            j = " and " if op == "and" else " or "
            return "(" + j.join(self.src2(x, a, m, b) for x in f.args) + ")"
        side, i = self._qbit(f)
        return "(%s >> %d & 1)" % (a if side == "a" else b, i)

    @staticmethod
    def _parts(q: Formula):
        """(guard, constraint, witness) for a quantified formula q whose truth value is fixed.

        Returns a pair of dicts keyed by the bit value."""
        guard, body = q.args
        from .syntax import fand, fimp, fnot
        if q.op == "forall":
            constraint = {1: fimp(guard, body)}
            witness = {0: fand(guard, fnot(body))}
        else:
            constraint = {0: fimp(guard, fnot(body))}
            witness = {1: fand(guard, body)}
        return constraint, witness

    def _build(self):
        local = []
        for s in self.ontology.sentences:
            local.append(self.sym_diag(s))
        valid_terms = []
        self.req1 = []   # (bit, value, diag_fn, pair_src, guard_kind)
        for q in self.quant1:
            bit = self.bidx[("q", q)]
            cons, wit = self._parts(q)
            for val, chi in cons.items():
                lit = bx.var(bit) if val else bx.bnot(bx.var(bit))
                local.append(bx.bimp(lit, self.sym_diag(chi)))
                test = "(a >> %d & 1)" % bit if val else "(not (a >> %d & 1))" % bit
                valid_terms.append("(not %s or %s)" % (test, self.src2(chi, "a", "m", "b")))
                testb = test.replace("a >>", "b >>")
                valid_terms.append("(not %s or %s)" % (testb, self.src2(chi, "b", "sm", "a")))
            for val, om in wit.items():
                self.req1.append((bit, val, self._diag_fn(om), self._pair_fn(om), self._guard_m(q)))
        self.req0 = []
        for s in self.sentences:
            bit = self.bidx[("z", s)]
            sc = s if s.vars != ("y",) else swap_xy(s)
            cons, wit = self._parts(sc)
            two = len(sc.vars) == 2
            for val, chi in cons.items():
                lit = bx.var(bit) if val else bx.bnot(bx.var(bit))
                local.append(bx.bimp(lit, self.sym_diag(chi)))
                if two:
                    test = "(a >> %d & 1)" % bit if val else "(not (a >> %d & 1))" % bit
                    valid_terms.append("(not %s or %s)" % (test, self.src2(chi, "a", "m", "b")))
                    valid_terms.append("(not %s or %s)" % (test, self.src2(chi, "b", "sm", "a")))
            for val, om in wit.items():
                self.req0.append((bit, val, self._diag_fn(om),
                                  self._pair_fn(om) if two else None,
                                  self._guard_m(sc) if two else None))
        self.local = bx.band(*local)
        src = "lambda a, m, b, sm: " + (" and ".join(valid_terms) if valid_terms else "True")
        self._valid_fn = eval(src)  # noqa: S307

    def _diag_fn(self, f):
        e = self.sym_diag(f)
        return bx.compile_mask_fn(e)

    def _pair_fn(self, f):
        return eval("lambda a, m, b: bool(%s)" % self.src2(f))  # noqa: S307

    def _guard_m(self, q: Formula):
        """Multi-edges that make the guard of q true on a pair of distinct elements."""
        g = q.args[0]
        if g.op == "eq":
            return []
        if g.op == "atom" and len(g.vars) == 2 and g.vars[0] != g.vars[1]:
            bit = self.m_bit(g.pred, g.vars[0] == "x")
            return [m for m in self.all_M if m >> bit & 1]
        return []

    # ---------------------------------------------------------- semantics

    def valid(self, a: int, m: int, b: int) -> bool:
        """Whether (a, m, b) is consistent with every universal constraint (both directions)."""
        key = (a, m, b)
        v = self._valid_cache.get(key)
        if v is None:
            v = (a & self.zero_mask) == (b & self.zero_mask) and bool(
                self._valid_fn(a, m, b, self._swapM[m]))
            self._valid_cache[key] = v
            self._valid_cache[(b, self._swapM[m], a)] = v
        return v

    def _eliminate(self, cands):
        alive = set(cands)
        by_zero = {}
        for t in alive:
            by_zero.setdefault(t & self.zero_mask, set()).add(t)
        wit = {}

        def find(t, diag, pair, ms):
            if diag(t):
                return "diag"
            z = t & self.zero_mask
            for t2 in sorted(by_zero.get(z, ())):
                for m in ms:
                    if pair(t, m, t2) and self.valid(t, m, t2):
                        return (t2, m)
            return None

        changed = True
        while changed:
            changed = False
            for t in sorted(alive):
                for bit, val, diag, pair, ms in self.req1:
                    if (t >> bit & 1) != val:
                        continue
                    w = wit.get((t, bit))
                    if w is not None and (w == "diag" or w[0] in alive):
                        continue
                    w = find(t, diag, pair, ms)
                    if w is None:
                        alive.discard(t)
                        by_zero[t & self.zero_mask].discard(t)
                        changed = True
                        break
                    wit[(t, bit)] = w
            for z, group in list(by_zero.items()):
                if not group:
                    continue
                for bit, val, diag, pair, ms in self.req0:
                    if (z >> bit & 1) != val:
                        continue
                    ok = any(diag(t) for t in group)
                    if not ok and pair is not None:
                        ok = any(pair(t, m, t2) and self.valid(t, m, t2)
                                 for t in sorted(group) for t2 in sorted(group) for m in ms)
                    if not ok:
                        alive -= group
                        by_zero[z] = set()
                        changed = True
                        break
        return sorted(alive)

    def compatible(self, a: int, m_req: int, b: int):
        """Some surviving 2-type (a, M, b) with M containing m_req; returns M or None."""
        key = (a, m_req, b)
        if key in self._compat_cache:
            return self._compat_cache[key]
        res = None
        if a in self.type_set and b in self.type_set:
            for m in self.all_M:
                if m & m_req == m_req and self.valid(a, m, b):
                    res = m
                    break
        self._compat_cache[key] = res
        return res

    def two_types(self):
        """All surviving 2-types (t1, M, t2) with t1, t2 of the same 0-type."""
        out = []
        for a in self.types:
            for b in self.types:
                if (a & self.zero_mask) != (b & self.zero_mask):
                    continue
                for m in self.all_M:
                    if self.valid(a, m, b):
                        out.append((a, m, b))
        return out

    def zero_type(self, t: int) -> int:
        return t & self.zero_mask

    def has_unary(self, t: int, pred: str):
        """True/False if pred is in the type signature, None otherwise."""
        i = self.bidx.get(("u", pred))
        if i is None:
            return None
        return bool(t >> i & 1)

    def has_loop(self, t: int, role: str):
        i = self.bidx.get(("s", role))
        if i is None:
            return None
        return bool(t >> i & 1)

    def realizes_leaf(self, t: int, facts, const) -> bool:
        for f in facts:
            if len(f.args) == 1:
                if self.has_unary(t, f.pred) is False:
                    return False
            elif f.args[0] == const and f.args[1] == const:
                if self.has_loop(t, f.pred) is False:
                    return False
        return True

    def fact_mask(self, facts, const):
        """(required bits) for the unary and self-loop facts about const."""
        req = 0
        for f in facts:
            if len(f.args) == 1:
                i = self.bidx.get(("u", f.pred))
            elif f.args[0] == const and f.args[1] == const:
                i = self.bidx.get(("s", f.pred))
            else:
                continue
            if i is not None:
                req |= 1 << i
        return req

    def eval_pair(self, f: Formula, a: int, m: int, b: int) -> bool:
        return bool(eval("lambda a, m, b: bool(%s)" % self.src2(f))(a, m, b))  # noqa: S307

    def describe(self, t: int):
        out = []
        for i, (kind, x) in enumerate(self.base):
            if t >> i & 1:
                if kind == "u":
                    out.append("%s(x)" % x)
                elif kind == "s":
                    out.append("%s(x,x)" % x)
                else:
                    out.append(formula_str(x))
        return out

    def m_describe(self, m: int):
        out = []
        for j, r in enumerate(self.roles):
            if m >> (2 * j) & 1:
                out.append("%s(x,y)" % r)
            if m >> (2 * j + 1) & 1:
                out.append("%s(y,x)" % r)
        return out


def gf2_types(o: Ontology, db_roles=()) -> Gf2Types:
    return Gf2Types(o)


def _pair_requirements(table: Gf2Types, db: Database):
    req = {}
    for f in db.facts:
        if len(f.args) == 2 and f.args[0] != f.args[1] and not is_label(f.pred):
            fwd = table.m_bit(f.pred, True)
            if fwd is None:
                continue
            a, b = f.args
            req[(a, b)] = req.get((a, b), 0) | (1 << fwd)
            req[(b, a)] = req.get((b, a), 0) | (1 << table.m_bit(f.pred, False))
    return req


def reduce_domains(table: Gf2Types, db: Database, substitute=True, query_preds=frozenset()) -> dict:
    """Candidate 1-types per constant of db, for questions about the existence of a model.

    Starts from the types realizing each constant's unary and self-loop facts,
    enforces arc consistency along role edges and a common 0-type. With
    ``substitute`` it also drops a type t of a constant when another surviving
    type t2 of that constant can replace it everywhere: t2 is compatible with
    at least the neighbour types t is, every least multi-edge t needs towards
    such a neighbour has a counterpart for t2 showing no more atoms over
    ``query_preds``, t2 shows no more of those predicates itself, and t2 may
    sit unconnected next to at least the types t may. Replacing t by t2 in a
    model that avoids a positive query over ``query_preds`` gives another such
    model, so the existence of one is preserved.
    """
    consts = sorted(db.adom)
    dom = {}
    for c in consts:
        facts = [f for f in db.facts if c in f.args and not is_label(f.pred)]
        dom[c] = {t for t in table.types if table.realizes_leaf(t, facts, c)}
    req = _pair_requirements(table, db)
    nbrs = {c: sorted({d for (x, d) in req if x == c}) for c in consts}
    vis_t = 0
    vis_m = 0
    for p in query_preds:
        for kind in ("u", "s"):
            i = table.bidx.get((kind, p))
            if i is not None:
                vis_t |= 1 << i
        for fwd in (True, False):
            b = table.m_bit(p, fwd)
            if b is not None:
                vis_m |= 1 << b

    def ok(c, t, d, u):
        return table.compatible(t, req[(c, d)], u) is not None

    least_cache = {}

    def least(c, t, d, u):
        key = (t, req[(c, d)], u)
        if key not in least_cache:
            need = req[(c, d)]
            ms = {m & vis_m for m in table.all_M if m & need == need and table.valid(t, m, u)}
            least_cache[key] = [m for m in ms if not any(x != m and x & m == x for x in ms)]
        return least_cache[key]

    loose_cache = {}

    def loose(t):
        if t not in loose_cache:
            loose_cache[t] = frozenset(u for u in table.types if table.valid(t, 0, u))
        return loose_cache[t]

    def replaces(c, t2, t):
        if table.zero_type(t) != table.zero_type(t2) or (t2 & vis_t) & ~(t & vis_t):
            return False
        if not loose(t) <= loose(t2):
            return False
        for d in nbrs[c]:
            for u in dom[d]:
                if not ok(c, t, d, u):
                    continue
                if not ok(c, t2, d, u):
                    return False
                m2s = least(c, t2, d, u)
                if not all(any(x & m == x for x in m2s) for m in least(c, t, d, u)):
                    return False
        return True

    changed = True
    while changed:
        changed = False
        zeros = None
        for c in consts:
            z = {table.zero_type(t) for t in dom[c]}
            zeros = z if zeros is None else zeros & z
        for c in consts:
            keep = {t for t in dom[c] if table.zero_type(t) in zeros
                    and all(any(ok(c, t, d, u) for u in dom[d]) for d in nbrs[c])}
            if keep != dom[c]:
                dom[c] = keep
                changed = True
        if changed or not substitute:
            continue
        for c in consts:
            for t in sorted(dom[c]):
                for t2 in sorted(dom[c]):
                    if t2 != t and replaces(c, t2, t):
                        dom[c].discard(t)
                        changed = True
                        break
    return {c: frozenset(v) for c, v in dom.items()}
