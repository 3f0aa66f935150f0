"""Command-line front end: evaluation, inspection, generators, differential tests, benchmarks."""
from __future__ import annotations

import argparse
import csv
import gc
import io
import json
import os
import random
import sys
import time
from dataclasses import asdict, dataclass, field

from .cw_alci import eval_aq_alci, eval_ucq_alci, sat_alci
from .cw_gf2 import eval_aq_gf2, sat_gf2
from .dp import DPStats
from .errors import EngineError, ParseError, ValidationError
from .kexpr import (cograph_expression, eval_kexpr, gen_two_cliques, kexpr_for_database,
                    kexpr_matches, kexpr_text, kexpr_width, parse_kexpr, school_chain,
                    validate_kexpr)
from .normal import alci_to_gf2, closures, normalize_ontology
from .oracle import ListColoring, finite_model_oracle
from .parsing import parse_database, parse_ground_atom, parse_ontology, parse_query, parse_td, query_text
from .randgen import aq_instance, ucq_instance
from .reductions import gen_listcol_alc_cq, gen_listcol_gf2, random_listcol
from .rewrite import booleanize, rewrite
from .syntax import CQ, UCQ, Atom, Database, Ontology
from .tw_gf2 import (eval_aq_tw, eval_gf2_tw, min_fill_decomposition, sat_tw, td_from_parsed,
                     validate_td)
from .typesys import AlciTypes, Gf2Types

ALGORITHMS = ("cw-alci", "cw-gf2", "tw-gf2")


class UsageError(EngineError):
    exit_code = 2
    code = "usage"


# ---------------------------------------------------------------- reports

@dataclass
class RunReport:
    command: str
    verdict: str | None = None
    algorithm: str | None = None
    params: dict = field(default_factory=dict)     # k or width, |cl|, |q hat|, ...
    levels: list = field(default_factory=list)     # max |Theta| per node height
    wall_time: float | None = None
    peak: int | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self, timing=True) -> dict:
        d = asdict(self)
        if not timing:
            d["wall_time"] = None
            d["details"] = _strip_timing(d["details"])
        return d

    def to_json(self, timing=True) -> str:
        return json.dumps(self.to_dict(timing), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls(**json.loads(text))

    def with_stats(self, st: DPStats):
        self.levels = list(st.levels)
        self.peak = st.peak
        self.details.setdefault("by_kind", dict(st.by_kind))
        self.details.setdefault("early_exit", st.early_exit)
        return self


def _strip_timing(x):
    if isinstance(x, dict):
        return {k: _strip_timing(v) for k, v in x.items() if k not in ("seconds", "wall_time")}
    if isinstance(x, list):
        return [_strip_timing(v) for v in x]
    return x


# ---------------------------------------------------------------- loading

def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise EngineError("cannot read %s: %s" % (path, e.strerror or e)) from e


def load_ontology(path):
    return parse_ontology(_read(path), source=path)


def load_database(path):
    return parse_database(_read(path), source=path)


def load_kexpr(path):
    return parse_kexpr(_read(path), source=path)


def load_td(path):
    return td_from_parsed(parse_td(_read(path), source=path))


def load_query(source: str):
    """A query file or inline text. Returns ("aq", Atom) for a ground atom, else ("ucq", UCQ)."""
    text = _read(source) if os.path.exists(source) else source
    body = "\n".join(l for l in text.splitlines() if l.strip() and not l.strip().startswith("#"))
    if ":=" in body:
        return "ucq", parse_query(body, source=source)
    try:
        return "aq", parse_ground_atom(body.strip())
    except ParseError as e:
        raise ParseError("query is neither a ground atom nor 'q(...) := ...': %s" % e) from e


def _candidate(s):
    return tuple(c.strip() for c in s.split(",") if c.strip()) if s else ()


def _logic_of(o: Ontology, requested):
    if requested:
        want = requested.lower()
        if want in ("alc", "alci"):
            if o.dialect == "GF2":
                raise ValidationError("ontology is GF2 but --logic %s was requested" % requested)
            return "alci"
        return "gf2"
    return "gf2" if o.dialect == "GF2" else "alci"


def _method_of(args):
    if args.method:
        return args.method
    return "cw" if getattr(args, "kexpr", None) else "tw"


def _need_kexpr(args, db):
    if not args.kexpr:
        raise UsageError("--kexpr is required for the cliquewidth method")
    s = load_kexpr(args.kexpr)
    rep = validate_kexpr(s)
    if not rep.valid:
        raise ValidationError("invalid k-expression: " + "; ".join(rep.violations[:3]))
    if not kexpr_matches(s, db):
        raise ValidationError("the k-expression does not generate the database")
    return s


def _td_for(args, db):
    td = load_td(args.td) if getattr(args, "td", None) else min_fill_decomposition(db)
    errs = validate_td(td, db)
    if errs:
        raise ValidationError("invalid tree decomposition: " + "; ".join(errs[:3]))
    return td


def _cl_size(o: Ontology):
    if o.dialect == "GF2":
        return None
    return len(closures(normalize_ontology(o)).cl)


# ---------------------------------------------------------------- commands

def cmd_sat(args) -> RunReport:
    o = load_ontology(args.onto)
    db = load_database(args.db)
    logic, method = _logic_of(o, args.logic), _method_of(args)
    st = DPStats()
    t0 = time.perf_counter()
    if method == "cw":
        s = _need_kexpr(args, db)
        ok = (sat_alci if logic == "alci" else sat_gf2)(o, db, s, stats=st)
        params = {"k": kexpr_width(s)}
    else:
        td = _td_for(args, db)
        ok = sat_tw(o, db, td, stats=st)
        params = {"width": td.width}
    params["cl"] = _cl_size(o)
    rep = RunReport("sat", "satisfiable" if ok else "unsatisfiable", "%s-%s" % (method, logic),
                    params, wall_time=time.perf_counter() - t0)
    return rep.with_stats(st)


def evaluate(o, db, query, candidate=(), method="cw", logic="alci", s=None, td=None,
             extended_kexpr=None):
    """Shared dispatcher. Returns (entailed, algorithm id, params, stats)."""
    kind, q = query
    st = DPStats()
    params = {"cl": _cl_size(o)}
    if method == "cw":
        params["k"] = kexpr_width(s)
        if logic == "gf2":
            if kind != "aq":
                raise ValidationError("UCQs over GF2 are evaluated with --method tw")
            ent = eval_aq_gf2(o, q.pred, q.args, db, s, extended_kexpr=extended_kexpr, stats=st)
            return ent, "cw-gf2", params, st
        if kind == "aq" and len(q.args) == 1:
            return eval_aq_alci(o, q.pred, q.args[0], db, s, stats=st), "cw-alci", params, st
        if kind == "aq":
            q, candidate = _binary_aq(q)
        res = eval_ucq_alci(o, q, db, s, candidate, stats=st)
        params["qhat_size"] = res.bundle.qhat_size
        params["omega_size"] = res.bundle.omega_size
        return res.entailed, "cw-alci", params, st
    params["width"] = td.width
    if kind == "aq" and len(q.args) == 1:
        res = eval_aq_tw(o, q.pred, q.args[0], db, td, stats=st)
        return res.entailed, "tw-gf2", params, st
    if kind == "aq":
        q, candidate = _binary_aq(q)
    res = eval_gf2_tw(o, q, db, td, candidate, stats=st)
    params["qhat_size"] = res.bundle.qhat_size
    params["omega_size"] = res.bundle.omega_size
    return res.entailed, "tw-gf2", params, st


def _binary_aq(atom: Atom):
    a, b = atom.args
    if a == b:
        return UCQ((CQ(frozenset([Atom(atom.pred, ("x", "x"))]), ("x",)),), ("x",)), (a,)
    return UCQ((CQ(frozenset([Atom(atom.pred, ("x", "y"))]), ("x", "y")),), ("x", "y")), (a, b)


def cmd_eval(args) -> RunReport:
    o = load_ontology(args.onto)
    db = load_database(args.db)
    logic, method = _logic_of(o, args.logic), _method_of(args)
    query = load_query(args.query)
    cand = _candidate(args.cand)
    if query[0] == "ucq" and len(cand) != len(query[1].answer):
        raise ValidationError("the query has %d answer variables but %d candidate constants were given"
                              % (len(query[1].answer), len(cand)))
    s = _need_kexpr(args, db) if method == "cw" else None
    td = _td_for(args, db) if method == "tw" else None
    ext = load_kexpr(args.kexpr_ext) if getattr(args, "kexpr_ext", None) else None
    t0 = time.perf_counter()
    ent, alg, params, st = evaluate(o, db, query, cand, method, logic, s, td, ext)
    rep = RunReport("eval", "entailed" if ent else "not-entailed", alg, params,
                    wall_time=time.perf_counter() - t0)
    return rep.with_stats(st)


def cmd_kexpr(args) -> RunReport:
    s = load_kexpr(args.kexpr)
    if args.action == "eval":
        db = eval_kexpr(s, with_labels=args.labels)
        return RunReport("kexpr eval", details={"database": db.text()})
    rep = validate_kexpr(s, args.k)
    details = rep.to_dict()
    if args.db:
        details["matches_database"] = kexpr_matches(s, load_database(args.db))
    verdict = "valid" if rep.valid and details.get("matches_database", True) else "invalid"
    out = RunReport("kexpr check", verdict, params={"k": rep.width}, details=details)
    if verdict == "invalid":
        msgs = list(dict.fromkeys(rep.violations)) or ["the expression does not generate the database"]
        err = ValidationError("; ".join(msgs[:3]))
        err.report = out
        raise err
    return out


def cmd_types(args) -> RunReport:
    o = load_ontology(args.onto)
    logic = _logic_of(o, args.logic)
    if logic == "alci":
        T = AlciTypes(normalize_ontology(o))
        rows = [" ".join(t) for t in sorted(T.type_strings())]
    else:
        T = Gf2Types(alci_to_gf2(o))
        rows = sorted(" ".join(sorted(T.describe(t))) for t in T.types)
    return RunReport("types", None, "types-" + logic, {"types": len(rows)}, details={"types": rows})


def cmd_rewrite(args) -> RunReport:
    o = load_ontology(args.onto)
    kind, q = load_query(args.query)
    if kind == "aq":
        q, cand = _binary_aq(q) if len(q.args) == 2 else (
            UCQ((CQ(frozenset([Atom(q.pred, ("x",))]), ("x",)),), ("x",)), q.args)
    else:
        cand = _candidate(args.cand) or tuple("c%d" % i for i in range(len(q.answer)))
    qb, _ = booleanize(q, cand)
    base = alci_to_gf2(o) if args.variant == "tw" else o
    b = rewrite(base, qb, args.variant)
    details = {"ontology": b.ontology.text(), "qhat": query_text(b.qhat), "names": b.name_table()}
    return RunReport("rewrite show", None, "rewrite-" + args.variant, b.report(), details=details)


# -- generators

def read_graph(path):
    edges, verts = [], []
    for ln, raw in enumerate(_read(path).splitlines(), 1):
        line = raw.split("#")[0].strip()
        if not line:
            continue
        w = line.replace(",", " ").split()
        if len(w) == 1:
            verts.append(w[0])
        elif len(w) == 2:
            edges.append((w[0], w[1]))
            verts += w
        else:
            raise ParseError("expected 'u v' or a single vertex", ln, 1, path)
    return verts, edges


def read_lists(path):
    lists = {}
    for ln, raw in enumerate(_read(path).splitlines(), 1):
        line = raw.split("#")[0].strip()
        if not line:
            continue
        v, sep, rest = line.partition(":")
        if not sep:
            raise ParseError("expected 'v: 1 2 3'", ln, 1, path)
        try:
            cols = frozenset(int(x) for x in rest.replace(",", " ").split())
        except ValueError:
            raise ParseError("colors must be positive integers", ln, 1, path) from None
        if not cols or min(cols) < 1:
            raise ValidationError("vertex %s needs a nonempty list of positive colors" % v.strip())
        lists[v.strip()] = cols
    return lists


def listcol_instance(graph_path, lists_path):
    verts, edges = read_graph(graph_path)
    lists = read_lists(lists_path)
    vs = sorted(set(verts) | set(lists))
    missing = [v for v in vs if v not in lists]
    if missing:
        raise ValidationError("vertex %s has no color list" % missing[0])
    es = tuple(sorted({tuple(sorted(e)) for e in edges if e[0] != e[1]}))
    return ListColoring(tuple(vs), es, lists)


def write_bundle(out_dir, stem, o=None, db=None, kx=None, query=None, td=None, truth=None):
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def put(ext, text):
        p = os.path.join(out_dir, stem + ext)
        with open(p, "w", encoding="utf-8") as fh:
            fh.write(text)
        written.append(p)

    if o is not None:
        put(".onto", "dialect %s\n" % o.dialect + o.text())
    if db is not None:
        put(".db", db.text())
    if kx is not None:
        put(".kx", kexpr_text(kx))
    if query is not None:
        put(".q", query if isinstance(query, str) else query_text(query))
    if td is not None:
        put(".td", td.to_text())
    if truth is not None:
        with open(os.path.join(out_dir, "truth.json"), "w", encoding="utf-8") as fh:
            json.dump(truth, fh, sort_keys=True, indent=2)
            fh.write("\n")
        written.append(os.path.join(out_dir, "truth.json"))
    return written


def cmd_gen(args) -> RunReport:
    if args.family in ("listcol-gf2", "listcol-alc"):
        if not args.graph or not args.lists:
            raise UsageError("--graph and --lists are required")
        inst = listcol_instance(args.graph, args.lists)
        if not inst.is_connected():
            raise ValidationError("the coloring graph must be connected")
        edges = [e for e in inst.edges]
        if args.family == "listcol-gf2":
            g2 = cograph_expression(inst.vertices, edges)
            enc = gen_listcol_gf2(inst, g2)
            query = "%s(%s)\n" % (enc.query[0], enc.query[1])
            kx = enc.kexpr
        else:
            try:
                g2 = cograph_expression(inst.vertices, edges)
            except ValidationError:
                g2 = None
            enc = gen_listcol_alc_cq(inst, g2)
            query = enc.query
            kx = enc.kexpr if enc.kexpr is not None else kexpr_for_database(enc.db)
        truth = {
            "generator": args.family,
            "colorable": enc.colorable,
            "expected_verdict": "entailed" if enc.entailed_expected else "not-entailed",
            "candidate": list(enc.candidate),
            "color_bits": enc.bits,
            "kexpr_width": kexpr_width(kx),
            "provenance": {"graph": os.path.basename(args.graph), "lists": os.path.basename(args.lists),
                           "vertices": len(inst.vertices), "edges": len(inst.edges), "k": inst.k},
        }
        files = write_bundle(args.out_dir, args.family, enc.ontology, enc.db, kx, query,
                             min_fill_decomposition(enc.db), truth)
        return RunReport("gen", truth["expected_verdict"], args.family,
                         {"k": truth["kexpr_width"]}, details={"files": files, "truth": truth})
    if args.family == "school-chain":
        db, s = school_chain(args.groups)
        o = bench_ontology("school-chain")
        files = write_bundle(args.out_dir, "school", o, db, s, "Employee(t1)\n",
                             min_fill_decomposition(db),
                             {"generator": "school-chain", "groups": args.groups, "candidate": ["t1"],
                              "expected_verdict": "entailed"})
        return RunReport("gen", None, "school-chain", {"k": kexpr_width(s)}, details={"files": files})
    raise UsageError("unknown family %s" % args.family)


def cmd_oracle(args) -> RunReport:
    o = load_ontology(args.onto)
    db = load_database(args.db)
    t0 = time.perf_counter()
    if not args.query:
        res = finite_model_oracle(o, db, None, (), extra=args.extra)
        verdict = "unsatisfiable" if res.entailed else "satisfiable"
    else:
        kind, q = load_query(args.query)
        cand = _candidate(args.cand)
        if kind == "aq":
            q, cand = _binary_aq(q) if len(q.args) == 2 else (
                UCQ((CQ(frozenset([Atom(q.pred, ("x",))]), ("x",)),), ("x",)), q.args)
        res = finite_model_oracle(o, db, q, cand, extra=args.extra)
        verdict = res.verdict
    return RunReport("oracle", verdict, "oracle", {"extra": args.extra, "domain": res.domain_size},
                     wall_time=time.perf_counter() - t0)


# -- differential testing

@dataclass
class Case:
    name: str
    ontology: Ontology
    db: Database
    query: tuple            # ("aq", Atom) or ("ucq", UCQ)
    candidate: tuple = ()
    kexpr: object = None
    td: object = None


def random_cases(n, seed=0, kind="aq"):
    """Random instances with both a k-expression and a tree decomposition."""
    out = []
    for i in range(n):
        sd = seed * 100_003 + i
        if kind == "aq" or (kind == "both" and i % 2 == 0):
            inst = aq_instance(sd)
            a, c = inst.aq
            q = ("aq", Atom(a, (c,)))
        else:
            inst = ucq_instance(sd)
            q = ("ucq", inst.query)
        out.append(Case("seed%d" % sd, inst.ontology, inst.db, q, (), inst.kexpr,
                        min_fill_decomposition(inst.db)))
    return out


def load_corpus(path):
    """Instances stored as sibling files ``NAME.onto/.db/.q`` with optional .kx, .td, NAME.json."""
    if not os.path.isdir(path):
        raise EngineError("corpus directory %s does not exist" % path)
    cases = []
    for root, _, files in sorted(os.walk(path)):
        for f in sorted(files):
            if not f.endswith(".onto"):
                continue
            stem = os.path.join(root, f[:-5])
            if not os.path.exists(stem + ".db") or not os.path.exists(stem + ".q"):
                continue
            o = load_ontology(stem + ".onto")
            db = load_database(stem + ".db")
            q = load_query(stem + ".q")
            cand = ()
            meta = stem + ".json"
            if not os.path.exists(meta):
                meta = os.path.join(root, "truth.json")
            if os.path.exists(meta):
                cand = tuple(json.loads(_read(meta)).get("candidate", ()))
            if q[0] == "aq":
                cand = ()
            s = load_kexpr(stem + ".kx") if os.path.exists(stem + ".kx") else kexpr_for_database(db)
            td = load_td(stem + ".td") if os.path.exists(stem + ".td") else min_fill_decomposition(db)
            cases.append(Case(os.path.relpath(stem, path), o, db, q, cand, s, td))
    return cases


def _oracle_verdict(case: Case, extra=2):
    kind, q = case.query
    cand = case.candidate
    if kind == "aq":
        q, cand = _binary_aq(q) if len(q.args) == 2 else (
            UCQ((CQ(frozenset([Atom(q.pred, ("x",))]), ("x",)),), ("x",)), q.args)
    return finite_model_oracle(case.ontology, case.db, q, cand, extra=extra).entailed


def applicable(case: Case):
    kind, q = case.query
    gf2 = case.ontology.dialect == "GF2"
    algs = []
    if not gf2:
        algs.append("cw-alci")
    if kind == "aq" and len(q.args) == 1:
        algs.append("cw-gf2")
    algs.append("tw-gf2")
    return algs


def run_algorithm(alg, case: Case) -> bool:
    if alg == "cw-alci":
        return evaluate(case.ontology, case.db, case.query, case.candidate, "cw", "alci", s=case.kexpr)[0]
    if alg == "cw-gf2":
        return evaluate(case.ontology, case.db, case.query, case.candidate, "cw", "gf2", s=case.kexpr)[0]
    if alg == "tw-gf2":
        return evaluate(case.ontology, case.db, case.query, case.candidate, "tw", "gf2", td=case.td)[0]
    raise UsageError("unknown algorithm %s" % alg)


def difftest(cases, runner=run_algorithm, oracle=_oracle_verdict, out_dir=None, minimize=True):
    """Run every applicable algorithm and the oracle on each case; returns a summary dict."""
    matrix = {a: {"agree": 0, "disagree": 0} for a in ALGORITHMS}
    bad = []
    for case in cases:
        truth = oracle(case)
        for alg in applicable(case):
            got = runner(alg, case)
            if got == truth:
                matrix[alg]["agree"] += 1
                continue
            matrix[alg]["disagree"] += 1
            rec = {"case": case.name, "algorithm": alg, "oracle": truth, "engine": got}
            if out_dir is not None:
                small = _minimize(case, alg, runner, oracle) if minimize else case
                rec["facts"] = len(small.db)
                rec["bundle"] = _dump_case(small, alg, truth, got, out_dir, len(bad))
            bad.append(rec)
    matrix = {a: v for a, v in matrix.items() if v["agree"] or v["disagree"]}
    return {"instances": len(cases), "agreement": matrix, "disagreements": bad,
            "all_agree": not bad}


def _minimize(case: Case, alg, runner, oracle):
    """Greedily drop database facts while the disagreement persists."""
    cur = case
    facts = sorted(case.db.facts)
    i = 0
    while i < len(facts):
        trial_facts = facts[:i] + facts[i + 1:]
        db = Database(trial_facts)
        kind, q = cur.query
        needed = set(q.args) if kind == "aq" else set(cur.candidate)
        if not trial_facts or not needed <= db.adom:
            i += 1
            continue
        trial = Case(cur.name, cur.ontology, db, cur.query, cur.candidate,
                     kexpr_for_database(db), min_fill_decomposition(db))
        try:
            if runner(alg, trial) != oracle(trial):
                cur, facts = trial, trial_facts
                continue
        except EngineError:
            pass
        i += 1
    return cur


def _dump_case(case: Case, alg, truth, got, out_dir, idx):
    d = os.path.join(out_dir, "repro_%03d" % idx)
    kind, q = case.query
    qtext = "%s(%s)\n" % (q.pred, ",".join(q.args)) if kind == "aq" else query_text(q)
    write_bundle(d, "case", case.ontology, case.db, case.kexpr, qtext, case.td,
                 {"case": case.name, "algorithm": alg, "oracle_entailed": truth,
                  "engine_entailed": got, "candidate": list(case.candidate)})
    return d


def cmd_difftest(args) -> RunReport:
    if args.corpus:
        cases = load_corpus(args.corpus)
    else:
        cases = random_cases(args.n, args.seed, args.kind)
    t0 = time.perf_counter()
    summary = difftest(cases, out_dir=args.out)
    verdict = "agree" if summary["all_agree"] else "disagree"
    return RunReport("difftest", verdict, "difftest", {"instances": len(cases), "seed": args.seed},
                     wall_time=time.perf_counter() - t0, details=summary)


# -- benchmarks

def bench_ontology(family) -> Ontology:
    if family == "school-chain":
        return parse_ontology("Teacher <= Employee\nTeacher <= <worksAt>.School\n"
                              "School <= [worksAt-].Employee\n")
    if family == "two-cliques":
        return parse_ontology("B <= [edge].C\nC <= ~D\n")
    raise UsageError("no fixed ontology for family %s" % family)


def bench_instance(family, size, rng):
    """(ontology, database, k-expression, query atom, size label) for one bench point."""
    if family == "school-chain":
        groups = max(1, round(size / 14.5))
        db, s = school_chain(groups)
        return bench_ontology(family), db, s, Atom("Employee", ("t1",))
    if family == "two-cliques":
        n = max(1, int(size))
        db, s = gen_two_cliques(n, n, max(1, n // 2))
        return bench_ontology(family), db, s, Atom("C", ("s0",))
    if family == "listcol":
        inst, g2 = random_listcol(rng, 6, int(size))
        enc = gen_listcol_gf2(inst, g2)
        return enc.ontology, enc.db, enc.kexpr, Atom(*enc.query[:1], (enc.query[1],))
    raise UsageError("unknown bench family %s" % family)


def bench_rows(family, sizes, seed=0, repeat=1):
    rng = random.Random(seed)
    rows = []
    for size in sizes:
        o, db, s, atom = bench_instance(family, size, rng)
        best = None
        for _ in range(max(1, repeat)):
            # as in timeit: no cyclic GC inside the timed region
            gc.collect()
            gc.disable()
            try:
                t0 = time.perf_counter()
                if family == "listcol":
                    ent = eval_aq_gf2(o, atom.pred, atom.args, db, s)
                else:
                    ent = eval_aq_alci(o, atom.pred, atom.args[0], db, s)
                dt = time.perf_counter() - t0
            finally:
                gc.enable()
            best = dt if best is None else min(best, dt)
        rows.append({"family": family, "size": size, "facts": len(db), "k": kexpr_width(s),
                     "seconds": best, "verdict": "entailed" if ent else "not-entailed"})
    return rows


def linear_fit(rows):
    """Least-squares fit seconds = a * facts through the origin, with per-point residual ratios."""
    num = sum(r["facts"] * r["seconds"] for r in rows)
    den = sum(r["facts"] ** 2 for r in rows)
    a = num / den if den else 0.0
    ratios = []
    for r in rows:
        pred = a * r["facts"]
        if pred <= 0 or r["seconds"] <= 0:
            ratios.append(float("inf"))
        else:
            ratios.append(max(r["seconds"] / pred, pred / r["seconds"]))
    steps = [rows[i + 1]["seconds"] / rows[i]["seconds"] if rows[i]["seconds"] > 0 else float("inf")
             for i in range(len(rows) - 1)]
    return {"a": a, "residual_ratios": ratios, "max_residual": max(ratios) if ratios else 0.0,
            "step_ratios": steps}


def cmd_bench(args) -> RunReport:
    sizes = [int(float(x)) for x in args.sizes.split(",") if x.strip()]
    rows = bench_rows(args.family, sizes, args.seed, args.repeat)
    fit = linear_fit(rows)
    return RunReport("bench", None, "bench-" + args.family, {"sizes": sizes},
                     wall_time=sum(r["seconds"] for r in rows), details={"rows": rows, "fit": fit})


def bench_csv(rows, fit) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, ["family", "size", "facts", "k", "seconds", "verdict"], lineterminator="\n")
    w.writeheader()
    timed = all("seconds" in r for r in rows)
    for r in rows:
        w.writerow(dict(r, seconds="%.6f" % r["seconds"]) if timed else r)
    if not timed:
        return buf.getvalue()
    buf.write("# linear fit: seconds = %.3e * facts; max residual factor %.3f\n"
              % (fit["a"], fit["max_residual"]))
    if fit["step_ratios"]:
        buf.write("# time ratios between consecutive sizes: %s\n"
                  % ", ".join("%.2f" % x for x in fit["step_ratios"]))
    return buf.getvalue()


# ---------------------------------------------------------------- argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker threads (evaluation currently runs single-threaded)")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="print the run report as JSON")
    common.add_argument("--no-timing", action="store_true", default=argparse.SUPPRESS,
                        help="omit wall times from reports, making them reproducible byte for byte")

    p = _Parser(prog="omqcw", description="OMQ evaluation over k-expressions and tree decompositions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--json", action="store_true", default=False)
    p.add_argument("--no-timing", action="store_true", default=False)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def engine_args(sp, query=True):
        sp.add_argument("--logic", choices=["alc", "alci", "gf2"])
        sp.add_argument("--method", choices=["cw", "tw"])
        sp.add_argument("--onto", required=True)
        sp.add_argument("--db", required=True)
        sp.add_argument("--kexpr")
        sp.add_argument("--td")
        if query:
            sp.add_argument("--query", required=True, help="query file or inline query / ground atom")
            sp.add_argument("--cand", help="candidate constants, comma separated")
            sp.add_argument("--kexpr-ext", help="k-expression for D plus the marker fact (binary GF2 AQs)")

    sp = sub.add_parser("sat", parents=[common], help="consistency of an ontology with a database")
    engine_args(sp, query=False)
    sp.set_defaults(func=cmd_sat)

    sp = sub.add_parser("eval", parents=[common], help="evaluate an OMQ")
    engine_args(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("kexpr", parents=[common], help="validate or evaluate a k-expression")
    sp.add_argument("action", choices=["check", "eval"])
    sp.add_argument("--kexpr", required=True)
    sp.add_argument("--db")
    sp.add_argument("--k", type=int)
    sp.add_argument("--labels", action="store_true", help="keep label facts when evaluating")
    sp.set_defaults(func=cmd_kexpr)

    sp = sub.add_parser("types", parents=[common], help="list surviving types")
    sp.add_argument("--logic", choices=["alc", "alci", "gf2"])
    sp.add_argument("--onto", required=True)
    sp.set_defaults(func=cmd_types)

    sp = sub.add_parser("rewrite", parents=[common], help="show the query rewriting")
    sp.add_argument("action", choices=["show"])
    sp.add_argument("--onto", required=True)
    sp.add_argument("--query", required=True)
    sp.add_argument("--cand")
    sp.add_argument("--variant", choices=["cw", "tw"], default="cw")
    sp.set_defaults(func=cmd_rewrite)

    sp = sub.add_parser("gen", parents=[common], help="generate labelled instances")
    sp.add_argument("family", choices=["listcol-gf2", "listcol-alc", "school-chain"])
    sp.add_argument("--graph")
    sp.add_argument("--lists")
    sp.add_argument("--groups", type=int, default=10)
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("oracle", parents=[common], help="brute-force finite-model oracle")
    sp.add_argument("--onto", required=True)
    sp.add_argument("--db", required=True)
    sp.add_argument("--query")
    sp.add_argument("--cand")
    sp.add_argument("--extra", type=int, default=2)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("difftest", parents=[common], help="differential test against the oracle")
    sp.add_argument("--corpus")
    sp.add_argument("--n", type=int, default=20)
    sp.add_argument("--kind", choices=["aq", "ucq", "both"], default="both")
    sp.add_argument("--out", help="directory for reproduction bundles")
    sp.set_defaults(func=cmd_difftest)

    sp = sub.add_parser("bench", parents=[common], help="timing over growing databases")
    sp.add_argument("--family", choices=["school-chain", "two-cliques", "listcol"], required=True)
    sp.add_argument("--sizes", default="1000,10000,100000")
    sp.add_argument("--repeat", type=int, default=1)
    sp.set_defaults(func=cmd_bench)
    return p


def render(rep: RunReport) -> str:
    """Plain-text rendering of a report."""
    d = rep.details
    if rep.command == "bench":
        return bench_csv(d["rows"], d["fit"])
    if rep.command == "kexpr eval":
        return d["database"]
    if rep.command == "types":
        return "\n".join(d["types"]) + ("\n" if d["types"] else "")
    if rep.command == "rewrite show":
        lines = ["# ontology", d["ontology"].rstrip("\n"), "# qhat", d["qhat"].rstrip("\n"), "# names"]
        lines += ["%s: %s" % (n, ", ".join(v)) for n, v in d["names"].items()]
        return "\n".join(lines) + "\n"
    if rep.command == "gen":
        return "".join(f + "\n" for f in d["files"])
    if rep.command == "difftest":
        lines = ["instances: %d" % d["instances"]]
        for alg, v in sorted(d["agreement"].items()):
            lines.append("%s: %d agree, %d disagree" % (alg, v["agree"], v["disagree"]))
        for b in d["disagreements"]:
            lines.append("DISAGREE %s %s oracle=%s engine=%s %s" % (
                b["case"], b["algorithm"], b["oracle"], b["engine"], b.get("bundle", "")))
        return "\n".join(lines) + "\n"
    parts = [rep.verdict or ""]
    if rep.algorithm:
        parts.append("algorithm=%s" % rep.algorithm)
    for k, v in sorted(rep.params.items()):
        if v is not None:
            parts.append("%s=%s" % (k, v))
    if rep.levels:
        parts.append("levels=%s" % ",".join(map(str, rep.levels)))
    if rep.peak is not None:
        parts.append("peak=%d" % rep.peak)
    if rep.wall_time is not None:
        parts.append("time=%.4fs" % rep.wall_time)
    return " ".join(parts) + "\n"


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    as_json = False
    timing = True
    try:
        args = build_parser().parse_args(argv)
        as_json, timing = args.json, not args.no_timing
        random.seed(args.seed)
        rep = args.func(args)
        rep.details.setdefault("threads", 1)
        if rep.command == "bench" and not timing:
            rep = RunReport(**rep.to_dict(timing=False))
        stdout.write(rep.to_json(timing) + "\n" if as_json else render(rep))
        return 0
    except EngineError as e:
        report = getattr(e, "report", None)
        err = {"code": e.code, "message": str(e), "exit_code": e.exit_code}
        if as_json:
            body = report.to_dict(timing) if report is not None else {}
            body["error"] = err
            stdout.write(json.dumps(body, sort_keys=True, indent=2) + "\n")
        stderr.write("error[%s]: %s\n" % (e.code, e))
        return e.exit_code


def main_exit():
    sys.exit(main())
