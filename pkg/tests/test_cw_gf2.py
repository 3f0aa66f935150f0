import random

import pytest
from hypothesis import given, strategies as st

from omqcw.cw_alci import eval_aq_alci
from omqcw.cw_gf2 import eval_aq_gf2, multi_edge_of, sat_gf2, theta_gf2
from omqcw.dp import max_label
from omqcw.errors import ValidationError
from omqcw.kexpr import AddRole, Intro, Union, kexpr_for_database
from omqcw.oracle import oracle_sat
from omqcw.parsing import parse_database, parse_ontology
from omqcw.randgen import aq_instance, random_database
from omqcw.syntax import Atom, Ontology
from omqcw.tw_gf2 import eval_aq_tw, sat_tw
from omqcw.typesys import Gf2Types

from support import permute_labels

SYM_A = "(forall x (forall y (-> (r x y) (<-> (A x) (A y)))))"


def kx(db_text):
    db = parse_database(db_text)
    return db, kexpr_for_database(db)


@pytest.mark.parametrize("text, want", [
    ("r(a,b)", {Atom("r", ("x", "y"))}),
    ("r(a,b)\nr(b,a)", {Atom("r", ("x", "y")), Atom("r", ("y", "x"))}),
    ("r(a,c)\nA(b)", set()),
])
def test_multi_edge(text, want):
    assert multi_edge_of(parse_database(text), "a", "b") == want


def test_multi_edge_needs_two_constants():
    with pytest.raises(ValidationError):
        multi_edge_of(parse_database("r(a,a)"), "a", "a")


def test_empty_ontology_always_satisfiable():
    for seed in range(10):
        db = random_database(random.Random(seed), 4)
        assert sat_gf2(Ontology("GF2"), db, kexpr_for_database(db))


def test_symmetric_label_conflict():
    o = parse_ontology(SYM_A + "\n(forall x (-> (B x) (not (A x))))")
    db, s = kx("r(a,b)\nA(a)\nB(b)")
    theta, _ = theta_gf2(s, o)
    assert theta == set()
    assert not oracle_sat(o, db)


def test_missing_two_type_kills_abstraction():
    o = parse_ontology("(forall x (forall y (-> (r x y) (not (s x y)))))")
    ok_db, ok_s = kx("r(a,b)\ns(b,a)")
    bad_db, bad_s = kx("r(a,b)\ns(a,b)")
    assert sat_gf2(o, ok_db, ok_s) and oracle_sat(o, ok_db)
    assert not sat_gf2(o, bad_db, bad_s) and not oracle_sat(o, bad_db)


def test_aq_examples():
    db, s = kx("r(a,b)")
    o = parse_ontology("(forall x (forall y (-> (r x y) (A y))))")
    assert eval_aq_gf2(o, "A", ("b",), db, s)
    assert not eval_aq_gf2(Ontology("GF2"), "A", ("b",), db, s)


def test_binary_aq_needs_extended_expression():
    db, s = kx("r(a,b)")
    o = parse_ontology("(forall x (forall y (-> (r x y) (s x y))))")
    with pytest.raises(ValidationError):
        eval_aq_gf2(o, "s", ("a", "b"), db, s)
    ext = AddRole("@not_s", 1, 2, AddRole("r", 1, 2, Union(Intro(1, "a"), Intro(2, "b"))))
    assert eval_aq_gf2(o, "s", ("a", "b"), db, s, extended_kexpr=ext)
    assert not eval_aq_gf2(o, "s", ("b", "a"), db, s,
                           extended_kexpr=AddRole("@not_s", 2, 1, ext.child))


SUCC_GF2 = ("(forall x (-> (B x) (exists y (and (r x y) "
            "(and (<-> (A1 x) (A1 y)) (<-> (A2 x) (A2 y)))))))")
SUCC_ALC = "B <= <r>.[A1,A2]="


@pytest.mark.parametrize("seed", range(15))
def test_equality_constructor_matches_guarded_sentence(seed):
    rng = random.Random(seed)
    db = random_database(rng, rng.randint(1, 3), names=("A1", "A2", "B", "C"), roles=("r",))
    s = kexpr_for_database(db)
    c = rng.choice(sorted(db.adom))
    gf = parse_ontology(SUCC_GF2 + "\n(forall x (forall y (-> (r x y) (-> (A1 y) (C x)))))")
    alc = parse_ontology(SUCC_ALC + "\nA1 <= [r-].C", dialect="ALCI")
    assert eval_aq_gf2(gf, "C", (c,), db, s) == eval_aq_alci(alc, "C", c, db, s)


# -- properties

def _permute_abstraction(a, perm, tb):
    z, T, E = a
    k = len(T)
    T2 = [None] * k
    for l in range(k):
        T2[perm[l + 1] - 1] = T[l]
    E2 = set()
    for lo, hi, t1, m, t2 in E:
        lo, hi = perm[lo + 1] - 1, perm[hi + 1] - 1
        if lo > hi:
            lo, hi, t1, m, t2 = hi, lo, t2, tb.swap_m(m), t1
        E2.add((lo, hi, t1, m, t2))
    return (z, tuple(T2), frozenset(E2))


@given(st.integers(0, 10 ** 6))
def test_label_permutation_equivariance(seed):
    inst = aq_instance(seed, max_adom=4, gf2=True)
    s = inst.kexpr
    k = max_label(s)
    tb = Gf2Types(inst.ontology)
    theta, _ = theta_gf2(s, inst.ontology, tb, k=k)
    perm = {l: l % k + 1 for l in range(1, k + 1)}
    theta2, _ = theta_gf2(permute_labels(s, perm), inst.ontology, tb, k=k)
    assert theta2 == {_permute_abstraction(a, perm, tb) for a in theta}


@given(st.integers(0, 10 ** 6))
def test_union_is_commutative(seed):
    rng = random.Random(seed)
    inst = aq_instance(seed, max_adom=2, gf2=True)
    db2 = random_database(rng, 2)
    left = inst.kexpr
    right = kexpr_for_database(parse_database("\n".join(
        str(f).replace("(", "(z_").replace(",", ",z_") for f in db2.facts)))
    k = max(max_label(left), max_label(right))
    tb = Gf2Types(inst.ontology)
    a, _ = theta_gf2(Union(left, right), inst.ontology, tb, k=k)
    b, _ = theta_gf2(Union(right, left), inst.ontology, tb, k=k)
    assert a == b


@given(st.integers(0, 10 ** 6))
def test_abstractions_use_surviving_types(seed):
    inst = aq_instance(seed, max_adom=4, gf2=True)
    tb = Gf2Types(inst.ontology)
    theta, _ = theta_gf2(inst.kexpr, inst.ontology, tb, prune=True)
    for z, T, E in theta:
        for ts in T:
            assert all(t in tb.type_set and tb.zero_type(t) == z for t in ts)
        for _, _, t1, m, t2 in E:
            assert tb.valid(t1, m, t2)


@given(st.integers(0, 10 ** 6))
def test_agrees_with_treewidth_algorithm(seed):
    inst = aq_instance(seed, max_adom=4, gf2=True)
    a, c = inst.aq
    assert sat_gf2(inst.ontology, inst.db, inst.kexpr) == sat_tw(inst.ontology, inst.db)
    assert eval_aq_gf2(inst.ontology, a, (c,), inst.db, inst.kexpr) == \
        eval_aq_tw(inst.ontology, a, c, inst.db).entailed
