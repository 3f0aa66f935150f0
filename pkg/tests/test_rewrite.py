import random

import pytest

from omqcw.hom import find_hom, hom_check
from omqcw.normal import alci_to_gf2, ci_sentence, closures, gf2_closures, normalize_ontology
from omqcw.oracle import finite_model_oracle
from omqcw.parsing import parse_concept, parse_database, parse_ontology, parse_query
from omqcw.randgen import random_ucq
from omqcw.rewrite import TreeCQ, size_envelope, booleanize, concept_of, enumerate_trees, formula_of, is_tree, rewrite
from omqcw.syntax import Atom, Interpretation, Ontology, concept_str, formula_str


def atoms(text):
    return parse_query(text).cqs[0].atoms


# -- closures

def test_closure_of_value_restriction():
    c = closures(normalize_ontology(parse_ontology("top <= [r].A")))
    assert [concept_str(x) for x in c.cl_all] == ["[r].A"]
    # cl* collects the fillers of value restrictions in cl
    assert [concept_str(x) for x in c.cl_star] == ["A"]
    assert {"A", "~A", "[r].A", "<r>.~A"} <= {concept_str(x) for x in c.cl}


def test_closure_of_empty_ontology():
    assert closures(normalize_ontology(Ontology("ALC"))).cl_all == ()


def test_gf2_closure_has_database_roles_both_ways():
    o = parse_ontology("(forall x (forall y (-> (r x y) (A x))))")
    cl2 = {formula_str(f) for f in gf2_closures(o, db_roles={"s"}).cl2}
    assert {"(r x y)", "(r y x)", "(s x y)", "(s y x)"} <= cl2


# -- ALCI to GF2

def test_standard_translation_of_existential():
    o = parse_ontology("A <= <r>.B")
    got = formula_str(alci_to_gf2(o).sentences[0])
    assert got == "(forall x (-> (= x x) (or (not (A x)) (exists y (and (r x y) (B y))))))"


def test_inverse_role_flips_guard():
    f = ci_sentence(parse_concept("A"), parse_concept("[r-].B"))
    assert "(r y x)" in formula_str(f)


# -- homomorphisms

def test_single_atom_match():
    i = Interpretation.from_database(parse_database("A(d)"))
    assert hom_check(atoms("q() := A(x)"), i)


def test_no_symmetric_pair():
    i = Interpretation.from_database(parse_database("r(a,b)"))
    assert not hom_check(atoms("q() := r(x,y), r(y,x)"), i)


def test_triangle_into_symmetric_clique():
    facts = "\n".join("r(%s,%s)" % (a, b) for a in "abc" for b in "abc" if a != b)
    i = Interpretation.from_database(parse_database(facts))
    q = atoms("q() := r(x,y), r(y,z), r(z,x)")
    assert hom_check(q, i)
    h = find_hom(q, i)
    assert len(set(h.values())) == 3


# -- booleanization

def test_unary_query_gets_a_marker():
    q, facts = booleanize(parse_query("q(x) := A(x)"), ("c",))
    assert q.answer == ()
    assert Atom("@ans_0", ("x",)) in q.cqs[0].atoms
    assert facts == [Atom("@ans_0", ("c",))]


def test_boolean_query_unchanged():
    q = parse_query("q() := r(x,y)")
    assert booleanize(q, ()) == (q, [])


def test_repeated_candidate_keeps_agreement():
    o = parse_ontology("A <= <r>.A")
    db = parse_database("A(c)\nr(c,c)")
    q = parse_query("q(x,y) := r(x,y)")
    qb, facts = booleanize(q, ("c", "c"))
    direct = finite_model_oracle(o, db, q, ("c", "c")).entailed
    marked = finite_model_oracle(o, db.union(facts), qb, ()).entailed
    assert direct == marked is True


# -- trees and their encodings

def test_trees_of_one_edge():
    cw = {(t.atoms, t.root) for t in enumerate_trees(parse_query("q() := r(x,y)"), "cw")}
    tw = {(t.atoms, t.root) for t in enumerate_trees(parse_query("q() := r(x,y)"), "tw")}
    edge = frozenset([Atom("r", ("x", "y"))])
    loop = frozenset([Atom("r", ("x", "x"))])
    assert cw == {(edge, None), (edge, "x"), (edge, "y")}
    assert tw == cw | {(loop, None), (loop, "x")}


def test_trees_of_single_atom():
    got = {(t.atoms, t.root) for t in enumerate_trees(parse_query("q() := A(x)"), "cw")}
    assert got == {(frozenset([Atom("A", ("x",))]), None), (frozenset([Atom("A", ("x",))]), "x")}


def test_multi_edge_is_not_a_tree_for_cliquewidth():
    a = atoms("q() := r(x,y), s(x,y)")
    assert not is_tree(a, "cw")
    assert is_tree(a, "tw")


def test_concept_of_tree():
    t = TreeCQ(atoms("q(x) := A(x), r(y,x), s(y,z), B(z), r(y,w), A(w)"), "x", "cw")
    assert concept_str(concept_of(t)) == "(A & <r->.(<s>.B & <r>.A))"


@pytest.mark.parametrize("text, expected", [
    ("q(x) := A(x)", "A"),
    ("q(x) := r(x,y)", "<r>.top"),
])
def test_concept_of_small_trees(text, expected):
    assert concept_str(concept_of(TreeCQ(atoms(text), "x", "cw"))) == expected


def test_formula_of_tree_with_loop():
    t = TreeCQ(atoms("q(x) := r(x,x), r(x,y), s(y,x), r(y,z), A(z)"), "x", "tw")
    assert formula_str(formula_of(t)) == \
        "(and (r x x) (exists y (and (r x y) (and (s y x) (exists x (and (r y x) (A x)))))))"


def test_formula_of_single_atom():
    assert formula_str(formula_of(TreeCQ(atoms("q(x) := A(x)"), "x", "tw"))) == "(A x)"


def test_boolean_edge_formula_agrees_with_matches():
    f = formula_of(TreeCQ(atoms("q() := r(x,y)"), None, "tw"))
    for db_text, want in [("r(a,b)", True), ("A(a)", False), ("r(a,a)", True)]:
        i = Interpretation.from_database(parse_database(db_text))
        assert i.holds(f, {}) is want


# -- the rewriting

def test_rewrite_adds_top_marker():
    b = rewrite(parse_ontology("B <= <r>.A"), parse_query("q() := A(x)"), "cw")
    text = b.ontology.text()
    assert "top <= @top" in text
    (name,) = b.trees
    assert "A <= %s" % name in text
    assert len(b.qhat.cqs) == 2


def test_existential_free_ontology_keeps_query():
    b = rewrite(parse_ontology("A <= B"), parse_query("q() := r(x,y), A(y)"), "cw")
    assert b.trees == {}
    assert len(b.qhat.cqs) == 1


def test_no_roles_no_propagation():
    b = rewrite(parse_ontology("B <= A"), parse_query("q() := A(x)"), "cw")
    assert "<" not in b.ontology.text().replace("<=", "")


@pytest.mark.parametrize("variant", ["cw", "tw"])
def test_rewriting_size_envelope(variant):
    rng = random.Random(5)
    o = parse_ontology("A <= <r>.B\nB <= [s-].A")
    base = alci_to_gf2(o) if variant == "tw" else o
    for _ in range(40):
        q = random_ucq(rng, max_atoms=4, max_cqs=2)
        qb, _ = booleanize(q, ("c",) * len(q.answer))
        b = rewrite(base, qb, variant)
        omega_max, qhat_max = size_envelope(b.base_size, qb.size(), variant)
        assert b.omega_size <= omega_max
        assert b.qhat_size <= qhat_max
