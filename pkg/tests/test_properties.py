"""Property-based checks: guarded construction can never reach a
hard-constraint violation, text round trips are lossless, and the generic
solver length matches the arithmetic oracle on random inputs."""

from __future__ import annotations

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from rackconfig.actions import apply_action
from rackconfig.engine import replay, solve
from rackconfig.model import (
    AssocKind,
    ClassName,
    ConfigurationError,
    ConfigurationState,
    IsA,
    Link,
    detect_violations,
    element_configuration,
    hard_violations,
)
from rackconfig.strategies import STRATEGIES
from rackconfig.textio import (
    format_configuration,
    format_trace_lines,
    parse_configuration,
    parse_trace,
)
from rackconfig.verifier import isomorphic

from conftest import random_walk
from oracles import minimal_generic_steps

element_counts = st.tuples(
    st.integers(0, 2), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)
).filter(lambda c: sum(c) <= 4)

strategy_names = st.sampled_from(sorted(STRATEGIES))


@settings(max_examples=40, deadline=None)
@given(strategy_names, element_counts, st.integers(0, 2**32 - 1))
def test_walks_never_reach_hard_violations(name, counts, seed):
    strategy = STRATEGIES[name]
    states = random_walk(
        element_configuration(counts), strategy, random.Random(seed), max_steps=25
    )
    for state in states:
        assert hard_violations(state.facts) == []


@settings(max_examples=25, deadline=None)
@given(element_counts, st.integers(0, 2**32 - 1))
def test_reachable_states_round_trip_through_text(counts, seed):
    states = random_walk(
        element_configuration(counts),
        STRATEGIES["generic"],
        random.Random(seed),
        max_steps=15,
    )
    state = states[-1]
    parsed = parse_configuration(format_configuration(state))
    assert parsed.facts == state.facts
    assert format_configuration(parsed) == format_configuration(state)


@settings(max_examples=25, deadline=None)
@given(strategy_names, element_counts, st.integers(0, 2**32 - 1))
def test_recorded_walks_replay_identically(name, counts, seed):
    initial = element_configuration(counts)
    strategy = STRATEGIES[name]
    rng = random.Random(seed)
    state = initial
    actions = []
    for _ in range(12):
        offered = strategy.generate(state, detect_violations(state))
        if not offered:
            break
        action = rng.choice(offered)
        actions.append(action)
        state = apply_action(state, action)
    text = format_trace_lines(initial, list(enumerate(actions, start=1)))
    parsed_initial, parsed_actions = parse_trace(text)
    final = replay(parsed_initial, parsed_actions)
    assert final.facts == state.facts
    assert format_trace_lines(
        parsed_initial, list(enumerate(parsed_actions, start=1))
    ) == text


@settings(max_examples=25, deadline=None)
@given(element_counts)
def test_detect_violations_is_pure(counts):
    state = element_configuration(counts)
    facts_before = state.facts
    first = detect_violations(state)
    second = detect_violations(state)
    assert first == second
    assert state.facts == facts_before


@settings(max_examples=25, deadline=None)
@given(element_counts, st.integers(0, 2**32 - 1), st.randoms(use_true_random=False))
def test_isomorphic_under_random_relabeling(counts, seed, rng):
    states = random_walk(
        element_configuration(counts),
        STRATEGIES["generic"],
        random.Random(seed),
        max_steps=10,
    )
    state = states[-1]
    ids = list(range(1, state.object_count + 1))
    shuffled = ids[:]
    rng.shuffle(shuffled)
    mapping = dict(zip(ids, shuffled))
    facts = []
    for fact in state.facts:
        if isinstance(fact, IsA):
            facts.append(IsA(mapping[fact.object_id], fact.class_name))
        else:
            facts.append(Link(fact.kind, mapping[fact.id1], mapping[fact.id2]))
    assert isomorphic(state, ConfigurationState.from_facts(facts))


@settings(max_examples=12, deadline=None)
@given(element_counts)
def test_generic_solution_length_matches_oracle(counts):
    trace = solve(element_configuration(counts), STRATEGIES["generic"])
    assert len(trace) == minimal_generic_steps(counts)


_CLASS_POOL = sorted(ClassName, key=lambda c: c.value)
_KIND_POOL = sorted(AssocKind, key=lambda k: k.value)

fuzz_ops = st.lists(
    st.one_of(
        st.tuples(st.just("create"), st.sampled_from(_CLASS_POOL)),
        st.tuples(
            st.just("associate"),
            st.sampled_from(_KIND_POOL),
            st.integers(1, 12),
            st.integers(1, 12),
        ),
    ),
    max_size=40,
)


@settings(max_examples=60, deadline=None)
@given(fuzz_ops)
def test_adversarial_edits_cannot_corrupt_state(ops):
    """Arbitrary create/associate attempts either raise or leave the state
    hard-constraint clean; there is no third outcome."""
    state = ConfigurationState.empty()
    for op in ops:
        try:
            if op[0] == "create":
                state, _ = state.create_object(op[1])
            else:
                state = state.associate(op[1], op[2], op[3])
        except ConfigurationError:
            continue
        assert hard_violations(state.facts) == []
