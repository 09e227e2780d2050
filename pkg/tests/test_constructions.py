import pytest
from hypothesis import given, settings, strategies as st

from sensitive_csp.algebra import Subpower, find_nu_term, generate_subpower, is_nu, star_closure
from sensitive_csp.consistency import is_kl_instance
from sensitive_csp.constructions import (build_prop_sens, build_prop_sw, nu_generator_tuples,
                                         nu_term_from_generators)
from sensitive_csp.corpus import (maj_algebra, maj_relation, min_algebra, min_not_starred,
                                  threshold24_algebra, threshold_unit_vectors)
from sensitive_csp.errors import StructureError
from sensitive_csp.instance import pair_code
from sensitive_csp.solver import has_extension_property, is_sensitive, is_solution


def gadget_assignment(a, n, names):
    out = {}
    for v in names:
        if v.startswith("x"):
            out[v] = a[int(v[1:]) - 1]
        else:
            out[v] = pair_code(a[int(v[1]) - 1], a[int(v[2]) - 1], n)
    return out


def test_min_relation_is_not_starred():
    rel = min_not_starred()
    assert len(rel) == 15
    assert (0, 0, 0, 0) in rel and (1, 1, 1, 1) not in rel
    assert star_closure(rel, 3).tuples == rel.tuples | {(1, 1, 1, 1)}


def test_sens_gadget_over_min():
    inst = build_prop_sens(min_not_starred(), 2)
    assert inst.variables == ("y12", "y34", "y13", "y24")
    assert set(inst.domains.values()) == {4}
    assert inst.is_k_uniform(2)
    assert is_kl_instance(inst, 2, 3).holds
    check = is_sensitive(inst)
    assert not check.holds
    assert check.witness == (("y12", "y34"), (3, 3))


def test_sens_gadget_over_majority_is_sensitive():
    inst = build_prop_sens(maj_relation(), 2)
    assert is_kl_instance(inst, 2, 3).holds
    assert is_sensitive(inst).holds


def test_sw_gadget_over_threshold():
    inst = build_prop_sw(threshold_unit_vectors(), 2)
    assert inst.variables == ("x1", "x2", "x3", "y12")
    assert is_kl_instance(inst, 2, 3).holds
    assert is_sensitive(inst).holds
    check = has_extension_property(inst)
    assert not check.holds
    assert check.witness == {"x1": 0, "x2": 0, "x3": 0}


def test_gadget_arity_checks():
    with pytest.raises(StructureError):
        build_prop_sw(min_not_starred(), 2)
    with pytest.raises(StructureError):
        build_prop_sens(threshold_unit_vectors(), 2)
    with pytest.raises(StructureError):
        build_prop_sw(Subpower.over(2, [(0, 1)]), 1)


four_tuples = st.lists(st.tuples(*[st.integers(0, 1)] * 4), min_size=1, max_size=4)
three_tuples = st.lists(st.tuples(*[st.integers(0, 1)] * 3), min_size=1, max_size=4)


@settings(max_examples=30, deadline=None)
@given(four_tuples)
def test_relation_tuples_give_sens_solutions(gens):
    rel = generate_subpower(min_algebra(), gens)
    inst = build_prop_sens(rel, 2)
    for a in rel:
        assert is_solution(inst, gadget_assignment(a, 2, inst.variables))


@settings(max_examples=30, deadline=None)
@given(three_tuples)
def test_relation_tuples_give_sw_solutions(gens):
    rel = generate_subpower(threshold24_algebra(), gens)
    inst = build_prop_sw(rel, 2)
    for a in rel:
        assert is_solution(inst, gadget_assignment(a, 2, inst.variables))


@settings(max_examples=30, deadline=None)
@given(four_tuples)
def test_sens_gadget_sensitive_when_relation_is_starred(gens):
    # for majority every subpower is determined by its projections
    rel = generate_subpower(maj_algebra(), gens)
    inst = build_prop_sens(rel, 2)
    assert is_sensitive(inst).holds


def test_nu_generator_tuples():
    gens, target = nu_generator_tuples(1)
    assert gens == [("y", "x", "x"), ("x", "y", "x"), ("x", "x", "y")]
    assert target == ("x", "x", "x")
    with pytest.raises(StructureError):
        nu_generator_tuples(0)


@pytest.mark.parametrize("builder,k", [(maj_algebra, 1), (maj_algebra, 2), (threshold24_algebra, 1),
                                       (threshold24_algebra, 2), (min_algebra, 1), (min_algebra, 2)])
def test_generator_route_agrees_with_search(builder, k):
    alg = builder()
    t = nu_term_from_generators(alg, k)
    assert (t is None) == (find_nu_term(alg, k + 2) is None)
    if t is not None:
        assert is_nu(alg, t, k + 2)
