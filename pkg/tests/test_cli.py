import io
import json

import pytest
from hypothesis import given, strategies as st

from omqcw.cli import (Case, RunReport, bench_rows, difftest, linear_fit, main, random_cases,
                       run_algorithm)
from omqcw.dp import DPStats
from omqcw.kexpr import kexpr_text, school_example


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def school(tmp_path):
    db, s = school_example()
    (tmp_path / "school.db").write_text(db.text())
    (tmp_path / "school.kx").write_text(kexpr_text(s))
    (tmp_path / "school.onto").write_text("Teacher <= <worksAt>.School\n")
    (tmp_path / "empty.onto").write_text("")
    return tmp_path


def test_sat_school_reports_width(school):
    code, out, _ = run("sat", "--onto", str(school / "empty.onto"), "--db", str(school / "school.db"),
                       "--kexpr", str(school / "school.kx"), "--json")
    assert code == 0
    rep = json.loads(out)
    assert rep["verdict"] == "satisfiable"
    assert rep["params"]["k"] == 3


def test_eval_text_output(school):
    code, out, _ = run("eval", "--onto", str(school / "school.onto"), "--db", str(school / "school.db"),
                       "--kexpr", str(school / "school.kx"), "--query", "School(c)")
    assert code == 0
    assert "entailed" in out


def test_methods_agree(school):
    verdicts = set()
    base = ("eval", "--onto", str(school / "school.onto"), "--db", str(school / "school.db"),
            "--kexpr", str(school / "school.kx"), "--json")
    for query, extra in (("q() := worksAt(x,y), School(y)", []),
                         ("q() := worksAt(x,y), School(y)", ["--method", "tw"]),
                         ("School(c)", ["--logic", "gf2"]),
                         ("School(c)", ["--method", "tw"])):
        code, out, _ = run(*base, "--query", query, *extra)
        assert code == 0
        verdicts.add(json.loads(out)["verdict"])
    assert verdicts == {"entailed"}


def test_ucq_needs_a_ucq_capable_method(school):
    code, _, err = run("eval", "--onto", str(school / "school.onto"), "--db", str(school / "school.db"),
                       "--kexpr", str(school / "school.kx"), "--logic", "gf2",
                       "--query", "q() := worksAt(x,y)")
    assert code == 3 and "error[validation]" in err


def test_malformed_kexpr_exits_3(school):
    (school / "bad.kx").write_text("(union (intro 1 a) (intro 1 a))\n")
    code, _, err = run("sat", "--onto", str(school / "empty.onto"), "--db", str(school / "school.db"),
                       "--kexpr", str(school / "bad.kx"))
    assert code == 3
    assert err.startswith("error[")


def test_parse_error_exits_2(school):
    (school / "bad.onto").write_text("A <= (B &\n")
    code, _, err = run("sat", "--onto", str(school / "bad.onto"), "--db", str(school / "school.db"))
    assert code == 2
    assert "error[parse]" in err


def test_usage_error_exits_2():
    assert run("frobnicate")[0] == 2


def test_budget_error_exits_4(tmp_path):
    (tmp_path / "o.onto").write_text("A <= B\n")
    (tmp_path / "d.db").write_text("".join("A(c%d)\n" % i for i in range(12)))
    code, out, _ = run("oracle", "--onto", str(tmp_path / "o.onto"), "--db", str(tmp_path / "d.db"),
                       "--json")
    assert code == 4
    assert json.loads(out)["error"]["code"] == "budget"


def test_kexpr_check(school):
    code, out, _ = run("kexpr", "check", "--kexpr", str(school / "school.kx"), "--db",
                       str(school / "school.db"), "--k", "2", "--json")
    assert code == 3


def test_types_listing(tmp_path):
    (tmp_path / "o.onto").write_text("top <= A\n")
    code, out, _ = run("types", "--onto", str(tmp_path / "o.onto"))
    assert code == 0 and "A" in out


def test_rewrite_show(tmp_path):
    (tmp_path / "o.onto").write_text("B <= <r>.A\n")
    code, out, _ = run("rewrite", "show", "--onto", str(tmp_path / "o.onto"), "--query", "q() := A(x)",
                       "--json")
    assert code == 0
    assert json.loads(out)["params"]["trees"] >= 1


def test_listcol_gf2_yes_instance(tmp_path):
    (tmp_path / "g.txt").write_text("a b\nb c\na c\n")
    (tmp_path / "l.txt").write_text("a: 1\nb: 2\nc: 3\n")
    out_dir = tmp_path / "inst"
    code, _, _ = run("gen", "listcol-gf2", "--graph", str(tmp_path / "g.txt"), "--lists",
                     str(tmp_path / "l.txt"), "--out-dir", str(out_dir))
    assert code == 0
    truth = json.loads((out_dir / "truth.json").read_text())
    assert truth["expected_verdict"] == "not-entailed"
    code, out, _ = run("eval", "--onto", str(out_dir / "listcol-gf2.onto"), "--db",
                       str(out_dir / "listcol-gf2.db"), "--kexpr", str(out_dir / "listcol-gf2.kx"),
                       "--query", str(out_dir / "listcol-gf2.q"), "--json")
    assert code == 0
    assert json.loads(out)["verdict"] == "not-entailed"


def test_no_timing_reports_are_byte_identical(school):
    args = ("eval", "--onto", str(school / "school.onto"), "--db", str(school / "school.db"),
            "--kexpr", str(school / "school.kx"), "--query", "School(c)", "--json", "--no-timing")
    assert run(*args)[1] == run(*args)[1]


def test_difftest_seeded_runs_are_identical():
    a = run("difftest", "--n", "3", "--seed", "4", "--json", "--no-timing")
    b = run("difftest", "--n", "3", "--seed", "4", "--json", "--no-timing")
    assert a == b and a[0] == 0


# -- reports

@given(st.sampled_from(["entailed", "not-entailed", None]), st.floats(0, 100, allow_nan=False),
       st.lists(st.integers(0, 1000), max_size=5))
def test_report_round_trip(verdict, wall, levels):
    rep = RunReport("eval", verdict, "cw-alci", {"k": 3}, levels, wall, max(levels, default=0),
                    {"nested": {"x": [1, 2]}})
    assert RunReport.from_json(rep.to_json()) == rep


def test_report_from_stats():
    st_ = DPStats()
    st_.note("leaf", 4, 0)
    st_.note("union", 7, 1)
    rep = RunReport("eval", "entailed", "cw-alci", {}).with_stats(st_)
    assert rep.peak == 7
    assert rep.levels == [4, 7]


# -- difftest harness

def test_empty_corpus_gives_empty_summary(tmp_path):
    summary = difftest([])
    assert summary == {"instances": 0, "agreement": {}, "disagreements": [], "all_agree": True}
    code, out, _ = run("difftest", "--corpus", str(tmp_path), "--json")
    assert code == 0 and json.loads(out)["details"]["instances"] == 0


def test_harness_detects_injected_fault(tmp_path):
    cases = random_cases(6, seed=2, kind="aq")

    def faulty(alg, case: Case):
        got = run_algorithm(alg, case)
        return not got if alg == "tw-gf2" else got

    summary = difftest(cases, runner=faulty, out_dir=str(tmp_path))
    assert not summary["all_agree"]
    assert summary["agreement"]["tw-gf2"]["disagree"] == len(cases)
    assert summary["agreement"]["cw-alci"]["disagree"] == 0
    first = summary["disagreements"][0]
    assert (tmp_path / "repro_000" / "truth.json").exists()
    assert first["facts"] <= len(cases[0].db)


def test_random_cases_agree():
    assert difftest(random_cases(10, seed=1, kind="both"))["all_agree"]


# -- bench

def test_single_size_single_row():
    rows = bench_rows("school-chain", [100])
    assert len(rows) == 1
    assert rows[0]["k"] == 3
    fit = linear_fit(rows)
    assert fit["max_residual"] == pytest.approx(1.0)
    assert fit["step_ratios"] == []


def test_bench_cli_csv():
    code, out, _ = run("bench", "--family", "school-chain", "--sizes", "100,200")
    assert code == 0
    assert out.splitlines()[0].startswith("family,size,facts")


def test_bench_without_timing_is_reproducible():
    a = run("--no-timing", "bench", "--family", "school-chain", "--sizes", "100,200")
    b = run("--no-timing", "bench", "--family", "school-chain", "--sizes", "100,200")
    assert a[0] == 0 and a == b
    assert "linear fit" not in a[1]
