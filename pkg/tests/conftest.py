"""Shared test helpers: tiny state builders and a seeded action-walk fuzzer."""

from __future__ import annotations

import random

from rackconfig.actions import apply_action
from rackconfig.model import (
    AssocKind,
    ClassName,
    ConfigurationState,
    detect_violations,
)
from rackconfig.strategies import Strategy


def minimal_element_a_state() -> ConfigurationState:
    """Hand-built valid configuration: elementA(1) with its moduleI in one
    frame of a rackSingle. Twelve objects/links added by hand, no engine."""
    state = ConfigurationState.empty()
    state, element = state.create_object(ClassName.ELEMENT_A)
    state, module = state.create_object(ClassName.MODULE_I)
    state = state.associate(AssocKind.ELEMENT_MODULE, element, module)
    state, rack = state.create_object(ClassName.RACK_SINGLE)
    frames = []
    for _ in range(4):
        state, frame = state.create_object(ClassName.FRAME)
        state = state.associate(AssocKind.RACK_FRAME, rack, frame)
        frames.append(frame)
    return state.associate(AssocKind.FRAME_MODULE, frames[0], module)


def random_walk(
    initial: ConfigurationState,
    strategy: Strategy,
    rng: random.Random,
    max_steps: int,
) -> list[ConfigurationState]:
    """Apply uniformly random generated actions until none are offered or the
    step budget runs out; returns every visited state including the start."""
    states = [initial]
    state = initial
    for _ in range(max_steps):
        actions = strategy.generate(state, detect_violations(state))
        if not actions:
            break
        state = apply_action(state, rng.choice(actions))
        states.append(state)
    return states
