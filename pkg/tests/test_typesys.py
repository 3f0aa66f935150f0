import random

import pytest
from hypothesis import given, strategies as st

from omqcw.normal import normalize_ontology
from omqcw.parsing import parse_database, parse_ontology
from omqcw.randgen import cl_size, random_gf2_ontology, random_ontology
from omqcw.syntax import Ontology, Role, cname, concept_str, forall, neg
from omqcw.typesys import alci_types, gf2_types, type_realizes_leaf

from support import TYPE_CORPUS, alci_type_realizable, gf2_pair_realizable, type_table_mismatches


def alci(text):
    return alci_types(normalize_ontology(parse_ontology(text)))


def test_bottom_has_no_types():
    assert alci("top <= bot").types == []


def test_every_type_contains_forced_name():
    tb = alci("top <= A")
    assert tb.types
    assert all(tb.contains(t, cname("A")) for t in tb.types)


def test_existential_disjunction_types():
    tb = alci("top <= ~A | <r>.A")
    ex = [c for c in tb.cl if concept_str(c) == "<r>.A"][0]
    for t in tb.types:
        assert not (tb.contains(t, cname("A")) and not tb.contains(t, ex))
    # survival matches small-model realizability for every candidate
    for t in tb.candidates:
        assert (t in tb.type_set) == alci_type_realizable(tb, t)


def test_elimination_removes_unwitnessed_types():
    tb = alci("top <= <r>.top & [r-].~A")
    assert len(tb.types) < len(tb.candidates)
    assert all(not tb.contains(t, cname("A")) for t in tb.types)


def test_gf2_symmetric_role_keeps_label():
    tb = gf2_types(parse_ontology("(forall x (forall y (-> (r x y) (<-> (A x) (A y)))))"))
    a_bit = tb.bidx[("u", "A")]
    fwd = 1 << tb.m_bit("r")
    for a, m, b in tb.two_types():
        if m & fwd:
            assert (a >> a_bit & 1) == (b >> a_bit & 1)
    with_a = [t for t in tb.types if t >> a_bit & 1]
    without = [t for t in tb.types if not t >> a_bit & 1]
    assert not gf2_pair_realizable(tb, with_a[0], fwd, without[0])


def test_gf2_empty_ontology_keeps_all_candidates():
    tb = gf2_types(Ontology("GF2"))
    assert tb.types == tb.candidates


def test_gf2_contradiction_has_no_types():
    tb = gf2_types(parse_ontology("(exists x (and (= x x) (and (A x) (not (A x)))))"))
    assert tb.types == []


def test_gf2_two_type_projections_survive():
    tb = gf2_types(parse_ontology("(forall x (-> (A x) (exists y (and (r y x) (B y)))))"))
    for a, _, b in tb.two_types():
        assert a in tb.type_set and b in tb.type_set


# -- leaf conditions

def test_leaf_missing_name():
    tb = alci("top <= A | B")
    t = next(t for t in tb.types if not tb.contains(t, cname("A")))
    assert not type_realizes_leaf(tb, t, parse_database("A(c)\nL1(c)"))


def test_leaf_without_loop():
    tb = alci("top <= A | B")
    t = next(t for t in tb.types if tb.contains(t, cname("A")))
    assert type_realizes_leaf(tb, t, parse_database("A(c)\nL1(c)"))


def test_leaf_loop_violates_value_restriction():
    tb = alci("top <= [r].B | C")
    vr = forall(Role("r"), cname("B"))
    t = next(t for t in tb.types if tb.contains(t, vr) and not tb.contains(t, cname("B")))
    assert not type_realizes_leaf(tb, t, parse_database("r(c,c)"))


def test_leaf_needs_one_constant():
    tb = alci("top <= A")
    with pytest.raises(ValueError):
        type_realizes_leaf(tb, tb.types[0], parse_database("r(a,b)"))


# -- the fixed corpus

@pytest.mark.parametrize("index", range(len(TYPE_CORPUS)))
def test_corpus_matches_realizability(index):
    assert type_table_mismatches(parse_ontology(TYPE_CORPUS[index])) == []


# -- properties

@given(st.integers(0, 10 ** 6))
def test_types_are_boolean_closed(seed):
    o = normalize_ontology(random_ontology(random.Random(seed), max_cl=10))
    tb = alci_types(o)
    assert set(tb.types) <= set(tb.candidates)
    for t in tb.types:
        assert tb.contains(t, tb.concept)
        for c in tb.cl:
            if c.op == "and":
                assert tb.contains(t, c) == all(tb.contains(t, x) for x in c.args)
            elif c.op == "or":
                assert tb.contains(t, c) == any(tb.contains(t, x) for x in c.args)
            elif c.op == "name":
                if neg(c) in tb.idx:
                    assert tb.contains(t, c) != tb.contains(t, neg(c))


@given(st.integers(0, 10 ** 6))
def test_random_alci_types_are_realizable(seed):
    o = random_ontology(random.Random(seed), max_cl=8)
    if cl_size(o) > 12:
        return
    assert type_table_mismatches(o) == []


@given(st.integers(0, 10 ** 6))
def test_gf2_projections_survive(seed):
    tb = gf2_types(random_gf2_ontology(random.Random(seed)))
    for a, _, b in tb.two_types():
        assert a in tb.type_set and b in tb.type_set
