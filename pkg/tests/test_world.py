"""
Tests for sample spaces, events, partitions and the scenario generator
"""

from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from services.errors import InfeasibleConstraints, InvalidSpace, ZeroConditioningEvent
from services.harness.schemas.scenario import ScenarioConstraints
from services.world.generator import random_scenario
from services.world.space import (
    DirectArgumentClass,
    Event,
    Partition,
    SampleSpace,
    classify_direct_argument,
    cond_prob,
    format_prob,
    parse_prob,
    prob,
    realized_info,
)


@st.composite
def spaces(draw, max_atoms=8):
    n = draw(st.integers(min_value=1, max_value=max_atoms))
    raw = draw(st.lists(st.integers(min_value=0, max_value=6), min_size=n, max_size=n))
    true_index = draw(st.integers(min_value=0, max_value=n - 1))
    raw[true_index] = max(raw[true_index], 1)
    total = sum(raw)
    atoms = [f"w{i}" for i in range(n)]
    return SampleSpace.build(atoms, [Fraction(w, total) for w in raw], atoms[true_index])


def subsets(space):
    indices = range(space.size)
    for r in range(space.size + 1):
        for combo in combinations(indices, r):
            yield Event.of(combo)


def test_cond_prob_examples(exm_space):
    """Test conditioning on the whole space, on a pair and on a singleton"""
    s = exm_space
    h = s.event(["h"])
    assert cond_prob(s, h, s.full) == Fraction(1, 3)
    assert cond_prob(s, h, s.event(["h", "b"])) == Fraction(1, 2)
    assert cond_prob(s, h, s.event(["h"])) == 1


def test_zero_conditioning_event_raises():
    s = SampleSpace.build(["h", "z"], ["1", "0"], "h")
    with pytest.raises(ZeroConditioningEvent):
        cond_prob(s, s.event(["h"]), s.event(["z"]))


@hsettings(max_examples=60, deadline=None)
@given(spaces(max_atoms=6))
def test_prob_is_bounded_and_additive(space):
    """Test 0 <= prob <= 1 and finite additivity over disjoint pairs"""
    events = list(subsets(space))
    for e in events:
        assert 0 <= prob(space, e) <= 1
    for a in events[:16]:
        for b in events[:16]:
            if len(a & b) == 0:
                assert prob(space, a | b) == prob(space, a) + prob(space, b)


@hsettings(max_examples=60, deadline=None)
@given(spaces(max_atoms=6))
def test_cond_prob_chain_rule(space):
    events = list(subsets(space))
    target = events[len(events) // 2]
    for given_event in events:
        if prob(space, given_event) > 0:
            assert cond_prob(space, target, given_event) * prob(space, given_event) == prob(
                space, target & given_event
            )


def test_realized_info_is_the_true_cell(exm_space, exm_partitions):
    s = exm_space
    assert realized_info(Partition.trivial(s), s.true_index) == s.full
    assert realized_info(exm_partitions["m"], s.true_index) == s.event(["h", "b"])
    singletons = Partition.build(s, [s.event([a]) for a in s.atoms])
    assert realized_info(singletons, s.true_index) == s.event(["h"])


@pytest.mark.parametrize(
    "atoms,weights,true_atom,invariant",
    [
        (["h", "h"], ["1/2", "1/2"], "h", "unique_atoms"),
        (["h", "a"], ["1/2", "2/5"], "h", "normalization"),
        (["h", "a"], ["1", "0"], "a", "true_atom_weight"),
        (["h", "a"], ["3/2", "-1/2"], "h", "nonnegative_weights"),
        (["h", "a"], ["1/2", "1/2"], "x", "true_atom"),
    ],
)
def test_invalid_spaces(atoms, weights, true_atom, invariant):
    with pytest.raises(InvalidSpace) as info:
        SampleSpace.build(atoms, weights, true_atom)
    assert info.value.details["invariant"] == invariant


def test_float_space_tolerates_rounding():
    s = SampleSpace.build(["a", "b", "c"], [0.1, 0.2, 0.7000000000000001], "a", rational=False)
    assert not s.is_rational
    assert cond_prob(s, s.event(["a"]), s.full) == pytest.approx(0.1)


def test_partition_validation(exm_space):
    s = exm_space
    with pytest.raises(InvalidSpace):
        Partition.build(s, [s.event(["h", "a"]), s.event(["a", "b"])])
    with pytest.raises(InvalidSpace):
        Partition.build(s, [s.event(["h"]), s.event(["a"])])
    with pytest.raises(InvalidSpace):
        Partition.build(s, [s.event([]), s.full])


def test_partition_from_info(exm_space):
    s = exm_space
    assert Partition.from_info(s, s.full).cells == (s.full,)
    p = Partition.from_info(s, s.event(["h", "b"]))
    assert s.event(["a"]) in p and s.event(["h", "b"]) in p


def test_classify_direct_argument_examples():
    s = SampleSpace.build(["h1", "h2", "x", "y"], ["1/4"] * 4, "h1")
    h = s.event(["h1", "h2"])
    assert classify_direct_argument(s, s.full, h) is DirectArgumentClass.SUPERSET_H
    assert classify_direct_argument(s, s.event(["h1", "h2", "x"]), h) is DirectArgumentClass.SUPERSET_H
    assert classify_direct_argument(s, s.event(["h1"]), h) is DirectArgumentClass.SUBSET_H
    assert classify_direct_argument(s, s.event(["x"]), h) is DirectArgumentClass.SUBSET_NOT_H
    assert classify_direct_argument(s, s.event(["h1", "x", "y"]), h) is DirectArgumentClass.SUPERSET_NOT_H
    assert classify_direct_argument(s, s.event(["h1", "x"]), h) is DirectArgumentClass.NONE


def test_classify_ignores_null_atoms():
    s = SampleSpace.build(["h", "z", "x"], ["1/2", "0", "1/2"], "h")
    h = s.event(["h"])
    # {h, z} equals H up to a null set
    assert classify_direct_argument(s, s.event(["h", "z"]), h) is DirectArgumentClass.SUBSET_H


def _brute_force_class(space, info, h):
    support = {i for i in range(space.size) if space.weights[i] > 0}
    i_s, h_s = info.members & support, h.members & support
    if i_s <= h_s:
        return DirectArgumentClass.SUBSET_H
    if not i_s & h_s:
        return DirectArgumentClass.SUBSET_NOT_H
    if h_s <= i_s:
        return DirectArgumentClass.SUPERSET_H
    if (support - h_s) <= i_s:
        return DirectArgumentClass.SUPERSET_NOT_H
    return DirectArgumentClass.NONE


@hsettings(max_examples=40, deadline=None)
@given(spaces(max_atoms=7), st.data())
def test_classify_matches_brute_force(space, data):
    h = Event.of(data.draw(st.sets(st.integers(0, space.size - 1))))
    for info in subsets(space):
        if prob(space, info) > 0:
            assert classify_direct_argument(space, info, h) is _brute_force_class(space, info, h)


def test_parse_and_format_prob():
    assert parse_prob("1/3") == Fraction(1, 3)
    assert parse_prob(0.25) == Fraction(1, 4)
    assert parse_prob("0.25", rational=False) == 0.25
    assert format_prob(Fraction(1, 3)) == "1/3"
    assert format_prob(1 / 3) == "0.333333333333"
    with pytest.raises(InvalidSpace):
        parse_prob("one third")


def test_random_scenario_is_reproducible():
    assert random_scenario(7, 2, 2) == random_scenario(7, 2, 2)
    assert random_scenario(7, 5, 3).fingerprint() != random_scenario(8, 5, 3).fingerprint()


def test_random_scenario_direct_arguments():
    constraints = ScenarioConstraints(direct_arguments=True)
    for seed in range(200):
        config = random_scenario(seed, 8, 4, constraints)
        space = config.build_space()
        h = config.hypothesis_event(space)
        for expert in config.experts:
            info = config.expert_partition(expert, space).cell_of(space.true_index)
            assert classify_direct_argument(space, info, h) is not DirectArgumentClass.NONE


def test_random_scenario_sweep_is_valid():
    for seed in range(1000):
        config = random_scenario(seed, 16, 6)
        space = config.build_space()
        assert all(w > 0 for w in space.weights)
        for expert in config.experts:
            assert space.true_index in config.expert_partition(expert, space).cell_of(space.true_index)


def test_random_scenario_min_informed():
    config = random_scenario(3, 4, 3, ScenarioConstraints(min_informed=3))
    space = config.build_space()
    for expert in config.experts:
        assert config.expert_partition(expert, space).cell_of(space.true_index) != space.full


@pytest.mark.parametrize("n_atoms,n_experts,constraints", [
    (1, 2, None),
    (3, 1, None),
    (3, 2, ScenarioConstraints(min_informed=3)),
])
def test_random_scenario_infeasible(n_atoms, n_experts, constraints):
    with pytest.raises(InfeasibleConstraints):
        random_scenario(0, n_atoms, n_experts, constraints)
