import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sensitive_csp.algebra import (Algebra, Leaf, Node, Operation, Subpower, clone_part,
                                   determined_by_projections, eval_term, eval_term_on_tuples,
                                   find_nu_term, generate_subpower, is_idempotent, is_invariant,
                                   is_nu, load_algebra, save_algebra, star_closure, term_arity,
                                   term_from_json, term_to_json)
from sensitive_csp.corpus import (maj_algebra, median_chain_algebra, min_algebra,
                                  second_of_four_algebra, threshold24_algebra)
from sensitive_csp.errors import ResourceGuardError, StructureError

from oracles import has_nu_brute, subpower_brute


@pytest.fixture(scope="module")
def maj():
    return maj_algebra()


@pytest.fixture(scope="module")
def th24():
    return threshold24_algebra()


def test_table_layout_last_argument_fastest():
    alg = Algebra.from_functions(3, {"p": (2, lambda a, b: a)})
    assert alg.operation("p").table == (0, 0, 0, 1, 1, 1, 2, 2, 2)
    assert alg.apply("p", [2, 0]) == 2


def test_bad_tables_rejected():
    with pytest.raises(StructureError):
        Algebra(2, (Operation("f", 2, (0, 1, 1)),))
    with pytest.raises(StructureError):
        Algebra(2, (Operation("f", 1, (0, 2)),))
    with pytest.raises(StructureError):
        Algebra(2, (Operation("f", 1, (0, 1)), Operation("f", 1, (1, 0))))
    with pytest.raises(StructureError):
        Algebra.from_json({"domain": 2})


def test_json_round_trip(tmp_path, th24):
    path = tmp_path / "a.json"
    save_algebra(th24, path)
    assert load_algebra(path) == th24
    assert json.loads(path.read_text())["operations"][0]["arity"] == 4


def test_square_is_coordinatewise(maj):
    sq = maj.square()
    assert sq.domain_size == 4
    for x, y, z in itertools.product(range(4), repeat=3):
        got = sq.apply("maj", [x, y, z])
        hi = maj.apply("maj", [x // 2, y // 2, z // 2])
        lo = maj.apply("maj", [x % 2, y % 2, z % 2])
        assert got == 2 * hi + lo


def test_terms_json_and_eval(maj):
    t = Node("maj", (Leaf(0), Node("maj", (Leaf(1), Leaf(2), Leaf(0))), Leaf(2)))
    assert term_from_json(term_to_json(t)) == t
    assert term_arity(t) == 3
    assert term_to_json(Leaf(1)) == 1
    assert eval_term(maj, t, [1, 0, 0]) == 0
    assert eval_term_on_tuples(maj, Leaf(1), [(0, 1), (1, 1)]) == (1, 1)


def test_idempotence():
    assert is_idempotent(maj_algebra())
    assert not is_idempotent(Algebra.from_functions(2, {"neg": (1, lambda a: 1 - a)}))


# ---------------------------------------------------------------- subpowers


def test_generate_subpower_known_sizes(maj):
    # majority on {0,1}: the three unit vectors generate only themselves and their majorities
    rel = generate_subpower(maj, [(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert rel.tuples == {(1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 0, 0)}
    full = generate_subpower(min_algebra(), [(0, 1), (1, 0)])
    assert full.tuples == {(0, 1), (1, 0), (0, 0)}


def test_witnesses_evaluate_to_tuples(th24):
    gens = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    rel = generate_subpower(th24, gens, with_witnesses=True)
    for tup, term in rel.witnesses.items():
        assert eval_term_on_tuples(th24, term, gens) == tup


def test_max_size_guard(maj):
    with pytest.raises(ResourceGuardError):
        clone_part(maj, 4, max_size=3)


gen_lists = st.lists(st.tuples(*[st.integers(0, 2)] * 3), min_size=1, max_size=3)


@settings(max_examples=40, deadline=None)
@given(gen_lists)
def test_closure_matches_brute_force(gens):
    alg = median_chain_algebra()
    rel = generate_subpower(alg, gens)
    assert rel.tuples == subpower_brute(alg, gens)
    assert is_invariant(alg, rel.tuples)


# ---------------------------------------------------------------- near-unanimity


@pytest.mark.parametrize("name,builder,arity,expected", [
    ("maj", maj_algebra, 3, True),
    ("th24", threshold24_algebra, 3, False),
    ("th24", threshold24_algebra, 4, True),
    ("min", min_algebra, 3, False),
    ("min", min_algebra, 4, False),
    ("q", second_of_four_algebra, 4, True),
    ("med", median_chain_algebra, 3, True),
])
def test_find_nu(name, builder, arity, expected):
    alg = builder()
    term = find_nu_term(alg, arity)
    assert (term is not None) == expected
    if term is not None:
        assert is_nu(alg, term, arity)


@pytest.mark.parametrize("builder,arity", [(threshold24_algebra, 3), (min_algebra, 3), (min_algebra, 4)])
def test_nu_none_agrees_with_depth3_enumeration(builder, arity):
    assert not has_nu_brute(builder(), arity, depth=3)


def test_depth_enumeration_finds_known_nu():
    assert has_nu_brute(maj_algebra(), 3, depth=1)
    assert has_nu_brute(threshold24_algebra(), 4, depth=1)


def test_nu_needs_arity_three(maj):
    with pytest.raises(StructureError):
        find_nu_term(maj, 2)


def test_clone_part_of_min_is_meets():
    part = clone_part(min_algebra(), 2)
    # x, y, min(x,y)
    assert len(part) == 3


# ---------------------------------------------------------------- projections


def test_star_closure_known():
    rel = Subpower.over(2, [(0, 0, 1), (0, 1, 0), (1, 0, 0)])
    starred = star_closure(rel, 2)
    assert starred.tuples == rel.tuples | {(0, 0, 0)}
    assert not determined_by_projections(rel, 2)
    assert determined_by_projections(starred, 2)


def test_star_closure_bounds():
    rel = Subpower.over(2, [(0, 1)])
    with pytest.raises(StructureError):
        star_closure(rel, 2)
    assert star_closure(rel, 0).tuples == {(a, b) for a in range(2) for b in range(2)}


relations = st.sets(st.tuples(*[st.integers(0, 1)] * 4), min_size=1).map(lambda s: Subpower.over(2, s))


@settings(max_examples=60, deadline=None)
@given(relations, st.integers(1, 3))
def test_star_closure_is_monotone_and_idempotent(rel, k):
    starred = star_closure(rel, k)
    assert rel.tuples <= starred.tuples
    assert star_closure(starred, k).tuples == starred.tuples
    for s in itertools.combinations(range(4), k):
        assert starred.project(s) == rel.project(s)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(*[st.integers(0, 1)] * 4), min_size=1, max_size=4))
def test_majority_subpowers_determined_by_binary_projections(gens):
    rel = generate_subpower(maj_algebra(), gens)
    assert determined_by_projections(rel, 2)


def test_power_matches_numpy_encoding(maj):
    cube = maj.power(3)
    codes = np.arange(8)
    bits = np.stack([codes // 4, codes // 2 % 2, codes % 2], axis=1)
    x, y, z = 3, 5, 6
    expected = (bits[x] + bits[y] + bits[z] >= 2).astype(int)
    assert cube.apply("maj", [x, y, z]) == int(expected @ [4, 2, 1])
