import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sensitive_csp.absorption import (BinRel, CloneCache, compose, find_absorption_witness,
                                      find_closed_walk, find_walk, has_loop,
                                      invariant_binary_relations, inverse, one_s_in_r,
                                      one_s_in_r_tuples, power, sample_binary_relations,
                                      verify_loop_theorems, walk_join, walk_join_tuples)
from sensitive_csp.algebra import Algebra, Leaf, eval_term, is_invariant
from sensitive_csp.corpus import maj_algebra, median_chain_algebra, second_of_four_algebra
from sensitive_csp.errors import StructureError

NE = BinRel(2, frozenset({(0, 1), (1, 0)}))
EQ2 = BinRel.equality(2)


@pytest.fixture(scope="module")
def median_relations():
    return invariant_binary_relations(median_chain_algebra())


def relation_on(n):
    cells = list(itertools.product(range(n), repeat=2))
    return st.sets(st.sampled_from(cells)).map(lambda s: BinRel(n, frozenset(s)))


def test_relation_algebra():
    assert compose(NE, NE) == EQ2
    assert inverse(BinRel(3, {(0, 1)})) == BinRel(3, {(1, 0)})
    assert power(NE, 0) == EQ2
    assert power(NE, 3) == NE
    assert not has_loop(NE) and has_loop(EQ2)
    assert str(NE) == "{01, 10}"
    assert BinRel.from_matrix(NE.matrix()) == NE
    with pytest.raises(StructureError):
        BinRel(2, {(0, 2)})


def test_walks():
    cycle = BinRel(3, {(0, 1), (1, 2), (2, 0)})
    assert find_closed_walk(cycle) == [0, 1, 2, 0]
    assert find_closed_walk(cycle, max_len=2) is None
    assert find_closed_walk(NE) == [0, 1, 0]
    path = BinRel(3, {(0, 1), (1, 2)})
    assert find_closed_walk(path) is None
    assert find_walk(path, 2) == [0, 1, 2]
    assert find_walk(path, 3) is None
    assert find_walk(path, 0) == [0]


@settings(max_examples=80, deadline=None)
@given(relation_on(3), st.integers(0, 4))
def test_find_walk_is_a_walk(r, length):
    walk = find_walk(r, length)
    m = np.linalg.matrix_power(r.matrix().astype(np.int64), length)
    assert (walk is not None) == bool(m.any())
    if walk is not None:
        assert len(walk) == length + 1
        assert all((a, b) in r for a, b in zip(walk, walk[1:]))


@settings(max_examples=80, deadline=None)
@given(relation_on(3))
def test_closed_walk_exists_iff_some_power_has_a_loop(r):
    walk = find_closed_walk(r)
    assert (walk is not None) == any(has_loop(power(r, l)) for l in range(1, 4))
    if walk is not None:
        assert walk[0] == walk[-1]
        assert all((a, b) in r for a, b in zip(walk, walk[1:]))


def test_one_s_in_r_tuples():
    full = BinRel.full(2)
    tuples = one_s_in_r_tuples(full, EQ2, 2)
    assert all(one_s_in_r(t, full, EQ2) for t in tuples)
    # 2 positions x 2 S-pairs x 4 R-pairs, minus the 4 counted twice
    assert len(tuples) == 12
    assert len(one_s_in_r_tuples(EQ2, EQ2, 3)) == 8
    assert one_s_in_r_tuples(NE, EQ2, 2) == [((0, 0), (0, 1)), ((0, 0), (1, 0)), ((1, 1), (0, 1)),
                                             ((1, 1), (1, 0)), ((0, 1), (0, 0)), ((1, 0), (0, 0)),
                                             ((0, 1), (1, 1)), ((1, 0), (1, 1))]


def test_one_s_in_r():
    assert one_s_in_r([(0, 1), (0, 0), (1, 0)], NE, EQ2)
    assert not one_s_in_r([(0, 1), (1, 0)], NE, EQ2)
    assert not one_s_in_r([(0, 0), (1, 1), (0, 1)], NE, EQ2)
    # entries of R that also lie in S are allowed
    assert one_s_in_r([(0, 0), (1, 1)], BinRel.full(2), EQ2)


def test_majority_absorption_examples():
    maj = maj_algebra()
    assert find_absorption_witness(maj, NE, EQ2, 3) is None
    assert find_absorption_witness(maj, BinRel.full(2), EQ2, 3) == Leaf(0)
    le = BinRel(2, {(0, 0), (0, 1), (1, 1)})
    t = find_absorption_witness(maj, le, EQ2, 3)
    assert t is not None


def test_absorption_input_validation():
    bad = BinRel(2, {(0, 1), (1, 1), (1, 0)})
    with pytest.raises(StructureError):
        find_absorption_witness(Algebra.from_functions(2, {"m": (2, min)}), bad, EQ2, 2)
    with pytest.raises(StructureError):
        find_absorption_witness(maj_algebra(), BinRel.full(3), EQ2, 2)


def test_absorption_witness_soundness(median_relations):
    alg = median_chain_algebra()
    cache = CloneCache(alg)
    rng = np.random.default_rng(5)
    picks = rng.choice(len(median_relations), size=(40, 2))
    for i, j in picks:
        r, s = median_relations[i], median_relations[j]
        for n in (2, 3):
            t = find_absorption_witness(alg, r, s, n)
            cached = cache.absorbs(r, s, n)
            assert (t is None) == (cached is None)
            for tup in one_s_in_r_tuples(r, s, n):
                for w in [x for x in (t, cached) if x is not None]:
                    left = eval_term(alg, w, [p[0] for p in tup])
                    right = eval_term(alg, w, [p[1] for p in tup])
                    assert (left, right) in r


def test_absorption_with_explicit_c():
    maj = maj_algebra()
    c = [((0, 0), (0, 1), (1, 0))]
    t = find_absorption_witness(maj, NE, EQ2, 3, c)
    assert t is None or eval_term(maj, t, [0, 0, 1]) != eval_term(maj, t, [0, 1, 0])
    assert find_absorption_witness(maj, NE, EQ2, 3, []) == Leaf(0)


def test_absorbs_is_monotone_in_arity(median_relations):
    cache = CloneCache(median_chain_algebra())
    for r in median_relations[::7]:
        for s in median_relations[::11]:
            if cache.absorbs(r, s, 2) is not None:
                assert cache.absorbs(r, s, 3) is not None


def _walk_pairs(alg, rels):
    """Relations r, s with R-walks a, b of 2 or 3 vertices linked by s."""
    n_el = alg.domain_size
    for r, s in itertools.product(rels, repeat=2):
        for n in (2, 3):
            walks = [w for w in itertools.product(range(n_el), repeat=n)
                     if all(p in r for p in zip(w, w[1:]))]
            for a, b in itertools.product(walks, repeat=2):
                if all(p in s for p in zip(a, b)):
                    yield r, s, a, b


def test_walk_join_tuples_shape():
    steps = walk_join_tuples([0, 1, 2], [3, 4, 5])
    assert steps == [((0, 3), (0, 1), (0, 1)), ((3, 4), (1, 4), (1, 2)), ((4, 5), (4, 5), (2, 5))]


def test_walk_join_connects_the_walks(median_relations):
    alg = median_chain_algebra()
    joined = 0
    for r, s, a, b in itertools.islice(_walk_pairs(alg, median_relations[::5]), 400):
        t = find_absorption_witness(alg, r, s, len(a), walk_join_tuples(a, b))
        if t is None:
            continue
        w = walk_join(alg, r, s, t, a, b)
        assert len(w) == len(a) + 1
        assert w[0] == a[0] and w[-1] == b[-1]
        assert all(p in r for p in zip(w, w[1:]))
        joined += 1
    assert joined > 50


@settings(max_examples=60, deadline=None)
@given(relation_on(3), relation_on(3))
def test_step_tuples_are_one_s_in_r(r, s):
    walks = [w for w in itertools.product(range(3), repeat=3) if all(p in r for p in zip(w, w[1:]))]
    for a, b in itertools.product(walks, repeat=2):
        if all(p in s for p in zip(a, b)):
            assert all(one_s_in_r(t, r, s) for t in walk_join_tuples(a, b))


def test_absorption_witness_joins_walks(median_relations):
    alg = median_chain_algebra()
    cache = CloneCache(alg)
    joined = 0
    for r, s, a, b in itertools.islice(_walk_pairs(alg, median_relations[::5]), 400):
        t = cache.absorbs(r, s, len(a))
        if t is not None:
            w = walk_join(alg, r, s, t, a, b)
            assert w[0] == a[0] and w[-1] == b[-1]
            joined += 1
    assert joined > 20


def test_walk_join_constant_at_a_loop():
    maj = maj_algebra()
    full = BinRel.full(2)
    assert walk_join(maj, full, EQ2, Leaf(1), [1, 1, 1], [1, 1, 1]) == [1, 1, 1, 1]


def test_walk_join_rejects_bad_input():
    maj = maj_algebra()
    le = BinRel(2, {(0, 0), (0, 1), (1, 1)})
    with pytest.raises(StructureError):
        walk_join(maj, le, EQ2, Leaf(0), [1, 0], [1, 0])
    with pytest.raises(StructureError):
        walk_join(maj, le, EQ2, Leaf(0), [0, 1], [0])


def test_invariant_relations_of_majority():
    rels = invariant_binary_relations(maj_algebra())
    # every binary relation on {0,1} is preserved by majority
    assert len(rels) == 16
    assert all(is_invariant(maj_algebra(), r.pairs) for r in rels)


def test_sampled_relations_are_invariant_and_seeded():
    alg = second_of_four_algebra()
    a = sample_binary_relations(alg, 30, seed=4)
    assert a == sample_binary_relations(alg, 30, seed=4)
    assert all(is_invariant(alg, r.pairs) for r in a)


def test_loop_report_for_majority():
    report = verify_loop_theorems(maj_algebra())
    assert report.ok
    assert (report.relations, report.with_loop) == (16, 12)
    assert report.vacuous == {"symmetric": 4, "closed_walk": 4, "walk_and_inverse": 4}
    assert report.stability_checked == 2
    assert report.to_json()["violations"] == []


def test_loop_check_for_projection_algebra():
    proj = Algebra.from_functions(3, {"p": (2, lambda a, b: a)})
    report = verify_loop_theorems(proj, n_max=3)
    assert report.ok
    assert report.relations == 512


def test_loop_check_needs_idempotence():
    neg = Algebra.from_functions(2, {"neg": (1, lambda a: 1 - a)})
    with pytest.raises(StructureError):
        verify_loop_theorems(neg)


def test_absorption_survives_inverse_and_composition(median_relations):
    alg = median_chain_algebra()
    cache = CloneCache(alg)
    found = 0
    for r in median_relations[::4]:
        for s in median_relations[::9]:
            if cache.absorbs(r, s, 3) is None:
                continue
            found += 1
            assert cache.absorbs(inverse(r), inverse(s), 3) is not None
            assert cache.absorbs(compose(r, r), compose(s, s), 3) is not None
    assert found > 10
