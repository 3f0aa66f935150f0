import pytest

from omqcw.errors import ParseError, ValidationError
from omqcw.kexpr import (cograph_expression, eval_kexpr, gen_school, gen_two_cliques, kexpr_for_database,
                         kexpr_matches, kexpr_text, kexpr_width, parse_kexpr, school_chain, school_example,
                         validate_kexpr)
from omqcw.parsing import parse_database
from omqcw.syntax import Atom, Database

SCHOOL_DB = """
Pupil(a1)
Pupil(a2)
Teacher(b)
School(c)
worksAt(b,c)
teaches(b,a1)
teaches(b,a2)
isClassmateOf(a1,a2)
isClassmateOf(a2,a1)
"""


def rename(db, mapping):
    return Database([Atom(f.pred, tuple(mapping[a] for a in f.args)) for f in db.facts])


def test_school_expression_generates_school_database():
    db, s = school_example()
    assert eval_kexpr(s, with_labels=False) == parse_database(SCHOOL_DB)
    assert db == parse_database(SCHOOL_DB)


def test_school_expression_has_width_three():
    _, s = school_example()
    rep = validate_kexpr(s, 3)
    assert rep.valid and rep.width == 3


def test_label_bound_violation():
    _, s = school_example()
    rep = validate_kexpr(s, 2)
    assert not rep.valid
    assert any("L3" in v for v in rep.violations)


def test_union_must_be_disjoint():
    rep = validate_kexpr(parse_kexpr("(union (intro 1 a) (intro 2 a))"))
    assert not rep.valid
    assert any("shared a" in v for v in rep.violations)


def test_single_intro():
    s = parse_kexpr("(intro 1 a (Pupil a))")
    assert eval_kexpr(s, with_labels=True) == parse_database("Pupil(a)\nL1(a)")


def test_role_insertion_between_singletons():
    s = parse_kexpr("(add r 1 2 (union (intro 1 a) (intro 2 b)))")
    db = eval_kexpr(s, with_labels=False)
    assert [f for f in db.facts if f.pred == "r"] == [Atom("r", ("a", "b"))]


def test_relabel_merges_classes():
    s = parse_kexpr("(add r 1 2 (relabel 3 1 (union (intro 1 a) (union (intro 3 c) (intro 2 b)))))")
    db = eval_kexpr(s, with_labels=False)
    assert {f.args for f in db.facts if f.pred == "r"} == {("a", "b"), ("c", "b")}


def test_matches_ignores_labels():
    db, s = school_example()
    assert kexpr_matches(s, db.union([Atom("L1", ("a1",))]))


def test_matches_detects_missing_fact():
    db, s = school_example()
    smaller = Database([f for f in db.facts if f != Atom("teaches", ("b", "a1"))])
    assert not kexpr_matches(s, smaller)


def test_text_roundtrip():
    _, s = school_example()
    assert kexpr_text(parse_kexpr(kexpr_text(s))) == kexpr_text(s)


@pytest.mark.parametrize("text", ["(add r 1 (intro 1 a))", "(frob 1 a)", "(intro 1 a", "(intro x a)"])
def test_malformed_expression(text):
    with pytest.raises(ParseError):
        parse_kexpr(text)


def test_label_zero_is_a_violation():
    rep = validate_kexpr(parse_kexpr("(intro 0 a)"))
    assert not rep.valid


def test_generator_reproduces_school_up_to_names():
    db, s = gen_school(1, 1, [2], [1])
    names = {"t1": "b", "s1": "c", "p1_1": "a1", "p1_2": "a2"}
    assert rename(db, names) == parse_database(SCHOOL_DB)
    assert validate_kexpr(s, 3).valid


def test_generator_needs_a_teacher():
    with pytest.raises(ValidationError):
        gen_school(1, 0, [], [])


def test_generator_two_schools():
    db, s = gen_school(2, 3, [3, 4, 4], [1, 1, 2])
    assert validate_kexpr(s, 3).valid
    assert kexpr_matches(s, db)
    assert len([f for f in db.facts if f.pred == "worksAt"]) == 3
    assert len([f for f in db.facts if f.pred == "Pupil"]) == 11


def test_school_chain_is_a_three_expression():
    db, s = school_chain(20)
    assert validate_kexpr(s, 3).valid
    assert kexpr_matches(s, db)


def test_two_disjoint_triangles():
    db, s = gen_two_cliques(3, 3, 0)
    assert validate_kexpr(s, 2).valid
    assert kexpr_matches(s, db)
    assert len([f for f in db.facts if f.pred == "edge"]) == 12


def test_two_cliques_single_vertex():
    db, s = gen_two_cliques(1, 1, 1)
    assert db.adom == {"s0"}
    assert not [f for f in db.facts if f.pred == "edge"]


def test_two_cliques_path():
    db, s = gen_two_cliques(2, 2, 1)
    edges = {f.args for f in db.facts if f.pred == "edge"}
    assert edges == {("a0", "s0"), ("s0", "a0"), ("b0", "s0"), ("s0", "b0")}
    assert kexpr_matches(s, db)


def test_generic_expression_for_any_database():
    db = parse_database("r(a,b)\nr(b,c)\nr(c,a)\nA(a)\ns(c,c)")
    s = kexpr_for_database(db)
    assert validate_kexpr(s).valid
    assert kexpr_matches(s, db)
    assert kexpr_width(s) <= 4


def test_cograph_expression_for_a_cograph():
    vs = ["a", "b", "c", "d"]
    es = [("a", "b"), ("c", "d"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")]
    s = cograph_expression(vs, es)
    assert validate_kexpr(s, 2).valid
    got = {f.args for f in eval_kexpr(s, with_labels=False).facts if f.pred == "edge"}
    assert got == set(es) | {(v, u) for u, v in es}


def test_path_on_four_vertices_is_not_a_cograph():
    with pytest.raises(ValidationError):
        cograph_expression(["a", "b", "c", "d"], [("a", "b"), ("b", "c"), ("c", "d")])
