"""Scope-bounded checking: counterexample search, UI safety/completeness,
configuration isomorphism."""

from __future__ import annotations

import pytest

from rackconfig.engine import replay, solve
from rackconfig.model import (
    AssocKind,
    ClassName,
    ConfigurationState,
    IsA,
    Link,
    element_configuration,
    is_valid,
)
from rackconfig.strategies import ALGORITHMIC
from rackconfig.verifier import (
    Counterexample,
    InvalidTargetError,
    PROPERTIES,
    SAME_FRAME,
    Scope,
    ScopeExhaustedUnsolvedError,
    VALID_RESULT,
    check_algorithm,
    check_ui_completeness,
    check_ui_safety,
    explore_ui_states,
    isomorphic,
    same_frame_witnesses,
    scope_inputs,
    validity_witnesses,
)

from conftest import minimal_element_a_state


def test_scope_inputs_enumeration():
    inputs = scope_inputs(Scope(1))
    assert len(inputs) == 16
    assert inputs[0] == (0, 0, 0, 0)
    assert inputs == sorted(inputs)
    assert len(scope_inputs(Scope(3))) == 256


def _spread_elements(state: ConfigurationState) -> list[tuple[int, ...]]:
    """Independently coded same-frame check: elements whose placed modules
    span more than one frame."""
    found = []
    for element in state.objects_of(
        (ClassName.ELEMENT_A, ClassName.ELEMENT_B, ClassName.ELEMENT_C, ClassName.ELEMENT_D)
    ):
        frames = set()
        for module in state.modules_of_element(element):
            frame = state.frame_of_module(module)
            if frame is not None:
                frames.add(frame)
        if len(frames) > 1:
            found.append((element, *sorted(frames)))
    return found


def test_same_frame_counterexample_found_and_brute_force_confirmed():
    scope = Scope(2)
    counterexample = check_algorithm(SAME_FRAME, scope)
    assert isinstance(counterexample, Counterexample)
    assert counterexample.witnesses
    # separately coded loop over the same inputs agrees on the first hit
    first_violating = None
    for counts in scope_inputs(scope):
        final = solve(element_configuration(counts), ALGORITHMIC).final_state
        if _spread_elements(final):
            first_violating = counts
            break
    assert first_violating == counterexample.counts
    assert _spread_elements(counterexample.trace.final_state) == [
        tuple(w) for w in counterexample.witnesses
    ]


def test_counterexample_replays_to_same_witnesses():
    counterexample = check_algorithm(SAME_FRAME, Scope(2))
    final = replay(
        counterexample.trace.initial, [s.action for s in counterexample.trace.steps]
    )
    assert same_frame_witnesses(final) == counterexample.witnesses


def test_counterexample_monotone_in_scope():
    small = check_algorithm(SAME_FRAME, Scope(2))
    large = check_algorithm(SAME_FRAME, Scope(3))
    assert small is not None and large is not None
    assert large.counts == small.counts  # first violating input is scope-stable


def test_validity_property_holds_in_scope():
    assert check_algorithm(VALID_RESULT, Scope(2)) is None


def test_scope_zero_passes_trivially():
    assert check_algorithm(SAME_FRAME, Scope(0)) is None


def test_unsolved_in_scope_raises():
    with pytest.raises(ScopeExhaustedUnsolvedError) as err:
        check_algorithm(SAME_FRAME, Scope(1, max_steps=3))
    assert err.value.counts == (0, 0, 0, 1)


def test_property_registry():
    assert sorted(PROPERTIES) == ["same-frame", "valid"]
    assert PROPERTIES["same-frame"] is SAME_FRAME


def test_same_frame_witnesses_unit():
    state = ConfigurationState.empty()
    state, element = state.create_object(ClassName.ELEMENT_B)
    state, f1 = state.create_object(ClassName.FRAME)
    state, f2 = state.create_object(ClassName.FRAME)
    state, m1 = state.create_object(ClassName.MODULE_II)
    state, m2 = state.create_object(ClassName.MODULE_II)
    state = state.associate(AssocKind.ELEMENT_MODULE, element, m1)
    state = state.associate(AssocKind.ELEMENT_MODULE, element, m2)
    state = state.associate(AssocKind.FRAME_MODULE, f1, m1)
    state = state.associate(AssocKind.FRAME_MODULE, f2, m2)
    assert same_frame_witnesses(state) == [(element, f1, f2)]
    assert same_frame_witnesses(minimal_element_a_state()) == []


def test_validity_witnesses_lists_subjects():
    state = element_configuration((1, 0, 0, 0))
    assert validity_witnesses(state) == [(1,)]
    assert validity_witnesses(minimal_element_a_state()) == []


def test_explore_ui_states_depth_one():
    reached = explore_ui_states(Scope(0, max_steps=1))
    # the empty state plus one state per create action (all distinct)
    assert len(reached) == 7


def test_ui_safety_small_scope():
    assert check_ui_safety(Scope(0, max_steps=2)) is None


def test_ui_completeness_finds_three_step_witness():
    witness = check_ui_completeness(minimal_element_a_state(), Scope(0, max_steps=4))
    assert witness is not None
    assert len(witness) == 3


def test_ui_completeness_trivial_and_invalid_targets():
    assert check_ui_completeness(ConfigurationState.empty(), Scope(0, max_steps=1)) == []
    with pytest.raises(InvalidTargetError):
        check_ui_completeness(element_configuration((1, 0, 0, 0)), Scope(0, max_steps=2))


def test_ui_completeness_reaches_spare_rack_layout():
    target = minimal_element_a_state()
    for _ in range(1):
        target, rack = target.create_object(ClassName.RACK_DOUBLE)
        for _ in range(8):
            target, frame = target.create_object(ClassName.FRAME)
            target = target.associate(AssocKind.RACK_FRAME, rack, frame)
    assert is_valid(target)
    witness = check_ui_completeness(target, Scope(0, max_steps=4))
    assert witness is not None
    assert len(witness) == 4


def test_isomorphic_accepts_id_permutations():
    state = minimal_element_a_state()
    n = state.object_count
    mapping = {old: n + 1 - old for old in range(1, n + 1)}  # reverse ids
    permuted_facts = []
    for fact in state.facts:
        if isinstance(fact, IsA):
            permuted_facts.append(IsA(mapping[fact.object_id], fact.class_name))
        else:
            permuted_facts.append(Link(fact.kind, mapping[fact.id1], mapping[fact.id2]))
    permuted = ConfigurationState.from_facts(permuted_facts)
    assert isomorphic(state, permuted)
    assert isomorphic(permuted, state)


def test_isomorphic_distinguishes_structure():
    a = minimal_element_a_state()
    b, _ = minimal_element_a_state().create_object(ClassName.MODULE_I)
    assert not isomorphic(a, b)
    # same object counts, different link structure
    two_frames = ConfigurationState.empty()
    two_frames, f1 = two_frames.create_object(ClassName.FRAME)
    two_frames, f2 = two_frames.create_object(ClassName.FRAME)
    two_frames, m = two_frames.create_object(ClassName.MODULE_I)
    linked = two_frames.associate(AssocKind.FRAME_MODULE, f1, m)
    other = two_frames.associate(AssocKind.FRAME_MODULE, f2, m)
    assert isomorphic(linked, other)  # relabeling swaps the frames
    assert not isomorphic(linked, two_frames)
