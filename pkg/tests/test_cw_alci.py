
from hypothesis import given, strategies as st

from omqcw.cw_alci import IoaSpace, eval_aq_alci, eval_ucq_alci, sat_alci, theta_aq, theta_ucq
from omqcw.dp import max_label
from omqcw.kexpr import AddRole, Intro, Union, kexpr_for_database, school_example
from omqcw.normal import normalize_ontology
from omqcw.oracle import finite_model_oracle, oracle_sat
from omqcw.parsing import parse_database, parse_ontology, parse_query
from omqcw.randgen import aq_instance
from omqcw.rewrite import RewriteBundle
from omqcw.syntax import CQ, UCQ, Atom, Ontology
from omqcw.typesys import alci_types

from support import alci_type_realizable, permute_labels


def kx(db_text):
    db = parse_database(db_text)
    return db, kexpr_for_database(db)


def test_unsatisfiable_ontology_has_empty_theta():
    _, s = kx("A(c)\nr(c,d)")
    theta, _ = theta_aq(s, parse_ontology("top <= bot"))
    assert theta == set()


def test_single_intro_theta_is_projected_types():
    o = parse_ontology("A <= [r].B\nB <= <r->.A")
    s = Intro(1, "c")
    theta, _ = theta_aq(s, o)
    tb = alci_types(normalize_ontology(o))
    space = IoaSpace(tb, 1)
    want = {space.leaf_ioa(t, 1) for t in tb.candidates if alci_type_realizable(tb, t)}
    assert theta == want


def test_role_insertion_filters_ioas():
    o = parse_ontology("A <= [r].B\nD <= ~B")
    s = AddRole("r", 1, 2, Union(Intro(1, "a", [Atom("A", ("a",))]), Intro(2, "b", [Atom("D", ("b",))])))
    before, _ = theta_aq(s.child, o)
    after, _ = theta_aq(s, o)
    assert before and not after
    assert not oracle_sat(o, parse_database("A(a)\nD(b)\nr(a,b)"))


def test_sat_examples():
    db, s = kx("A(c)")
    assert not sat_alci(parse_ontology("A <= bot"), db, s)
    assert sat_alci(Ontology("ALC"), db, s)
    sdb, ss = school_example()
    o = parse_ontology("Teacher <= <worksAt>.School")
    assert sat_alci(o, sdb, ss)
    assert oracle_sat(o, sdb, extra=0)


def test_aq_examples():
    db, s = kx("A(c)")
    assert eval_aq_alci(parse_ontology("A <= B"), "B", "c", db, s)
    assert not eval_aq_alci(Ontology("ALC"), "B", "c", db, s)


def test_ucq_examples():
    q = parse_query("q() := A(x)")
    db, s = kx("A(c)")
    assert eval_ucq_alci(Ontology("ALC"), q, db, s).entailed
    db, s = kx("B(c)")
    assert not eval_ucq_alci(Ontology("ALC"), q, db, s).entailed


def test_witness_off_the_database():
    o = parse_ontology("B <= <r>.A")
    q = parse_query("q() := r(x,y), A(y)")
    db, s = kx("B(c)")
    assert eval_ucq_alci(o, q, db, s).entailed
    assert finite_model_oracle(o, db, q, (), extra=1).entailed


def test_top_marker_cq_is_always_matched():
    bundle = RewriteBundle("cw", parse_ontology("top <= @top", allow_reserved=True),
                           UCQ((CQ(frozenset([Atom("@top", ("x",))])),)))
    _, s = kx("A(a)\nr(a,b)")
    theta, _, ops = theta_ucq(s, bundle)
    assert theta
    assert all(ops.complete(S) for _, S in theta)


def test_role_atom_needs_role_insertion():
    o = parse_ontology("A <= [r].A")
    q = parse_query("q() := r(x,y), A(x), A(y)")
    plain = Union(Intro(1, "a", [Atom("A", ("a",))]), Intro(2, "b", [Atom("A", ("b",))]))
    joined = AddRole("r", 1, 2, plain)
    assert not eval_ucq_alci(o, q, None, plain).entailed
    assert eval_ucq_alci(o, q, None, joined).entailed
    for text, want in (("A(a)\nA(b)", False), ("A(a)\nA(b)\nr(a,b)", True)):
        assert finite_model_oracle(o, parse_database(text), q).entailed is want


# -- properties

def _swap_ioa(g, k, perm):
    v = [None] * (2 * k)
    for l in range(1, k + 1):
        v[perm[l] - 1] = g[l - 1]
        v[k + perm[l] - 1] = g[k + l - 1]
    return tuple(v)


@given(st.integers(0, 10 ** 6))
def test_label_permutation_equivariance(seed):
    inst = aq_instance(seed, max_adom=4)
    s = inst.kexpr
    k = max_label(s)
    theta, _ = theta_aq(s, inst.ontology, k=k)
    perm = {l: l % k + 1 for l in range(1, k + 1)}
    theta2, _ = theta_aq(permute_labels(s, perm), inst.ontology, k=k)
    assert theta2 == {_swap_ioa(g, k, perm) for g in theta}


@given(st.integers(0, 10 ** 6))
def test_role_insertion_only_filters(seed):
    inst = aq_instance(seed, max_adom=4)
    s = AddRole("r", 1, 2, inst.kexpr)
    k = max(2, max_label(s))
    parent, _ = theta_aq(s, inst.ontology, k=k)
    child, _ = theta_aq(inst.kexpr, inst.ontology, k=k)
    assert parent <= child


@given(st.integers(0, 10 ** 6))
def test_theta_size_is_bounded(seed):
    inst = aq_instance(seed, max_adom=4)
    k = max_label(inst.kexpr)
    theta, _ = theta_aq(inst.kexpr, inst.ontology, k=k)
    tb = alci_types(normalize_ontology(inst.ontology))
    assert len(theta) <= 2 ** (k * (len(tb.cl_star) + len(tb.cl_all)))


@given(st.integers(0, 10 ** 6))
def test_aq_and_one_atom_ucq_agree(seed):
    inst = aq_instance(seed, max_adom=4)
    a, c = inst.aq
    q = UCQ((CQ(frozenset([Atom(a, ("x",))]), ("x",)),), ("x",))
    aq = eval_aq_alci(inst.ontology, a, c, inst.db, inst.kexpr)
    assert eval_ucq_alci(inst.ontology, q, inst.db, inst.kexpr, (c,)).entailed == aq


def test_random_aq_against_oracle():
    for seed in range(40):
        inst = aq_instance(seed)
        a, c = inst.aq
        q = UCQ((CQ(frozenset([Atom(a, ("x",))]), ("x",)),), ("x",))
        want = finite_model_oracle(inst.ontology, inst.db, q, (c,)).entailed
        assert eval_aq_alci(inst.ontology, a, c, inst.db, inst.kexpr) == want, seed
