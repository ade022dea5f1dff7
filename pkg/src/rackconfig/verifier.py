"""Scope-bounded checking of strategies against declarative properties.

``check_algorithm`` hunts for counterexamples to a conjecture about the
deterministic strategy's output: it enumerates every input multiset of
elements within a scope (lexicographic, smallest first), solves each one,
and evaluates the property on the final configuration. A returned
counterexample carries the violating input, the full trace, and the witness
tuples; None means the property held everywhere in scope, which is evidence,
not proof.

``check_ui_safety`` and ``check_ui_completeness`` bound-check the
interactive action set: safety explores every UI action sequence up to a
depth and confirms hard constraints are unreachable and no reachable state
is a dead end; completeness searches for a UI sequence whose result is
isomorphic to a given target configuration.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .actions import Action, apply_action
from .engine import (
    SolveOptions,
    SolveResult,
    SolveTrace,
    canonical_state_key,
    solve,
)
from .model import (
    ClassName,
    ConfigurationError,
    ConfigurationState,
    Link,
    detect_violations,
    element_configuration,
    hard_violations,
    is_valid,
)
from .strategies import ALGORITHMIC, Strategy, ui_actions


class ScopeExhaustedUnsolvedError(ConfigurationError):
    """The strategy failed to solve an in-scope input, so the property
    cannot be evaluated there."""

    def __init__(self, counts: tuple[int, int, int, int], result: SolveResult):
        super().__init__(
            f"strategy did not solve input {counts} within scope limits "
            f"({result.value})"
        )
        self.counts = counts
        self.result = result


class InvalidTargetError(ConfigurationError):
    """Completeness target is not a valid configuration."""


@dataclass(frozen=True)
class Scope:
    """Bounds for exhaustive checking: at most ``max_per_element_type``
    instances of each element class, and ``max_steps`` per solve or
    sequence."""

    max_per_element_type: int
    max_steps: int = 500


@dataclass(frozen=True)
class PropertySpec:
    """A named predicate over final configurations. ``check`` returns
    witness tuples (offending object ids); empty means the property holds."""

    name: str
    check: Callable[[ConfigurationState], list[tuple[int, ...]]] = field(compare=False)


@dataclass
class Counterexample:
    """A refutation: the element-count input (A, B, C, D), the trace that
    produced the offending state, and the witnesses found in it."""

    counts: tuple[int, int, int, int]
    trace: SolveTrace
    witnesses: list[tuple[int, ...]]


def same_frame_witnesses(state: ConfigurationState) -> list[tuple[int, ...]]:
    """Elements whose modules ended up spread over several frames; witness
    tuples are (element, frame, frame, ...)."""
    out: list[tuple[int, ...]] = []
    for element in state.objects_of(
        (ClassName.ELEMENT_A, ClassName.ELEMENT_B, ClassName.ELEMENT_C, ClassName.ELEMENT_D)
    ):
        frames = sorted(
            {
                frame
                for m in state.modules_of_element(element)
                if (frame := state.frame_of_module(m)) is not None
            }
        )
        if len(frames) > 1:
            out.append((element, *frames))
    return out


def validity_witnesses(state: ConfigurationState) -> list[tuple[int, ...]]:
    return [(v.subject,) for v in sorted(detect_violations(state), key=lambda v: v.subject)]


SAME_FRAME = PropertySpec("same-frame", same_frame_witnesses)
VALID_RESULT = PropertySpec("valid", validity_witnesses)

PROPERTIES: dict[str, PropertySpec] = {p.name: p for p in (SAME_FRAME, VALID_RESULT)}


def scope_inputs(scope: Scope) -> list[tuple[int, int, int, int]]:
    """All element-count inputs in lexicographic order."""
    bound = range(scope.max_per_element_type + 1)
    return list(itertools.product(bound, bound, bound, bound))


def check_algorithm(
    prop: PropertySpec,
    scope: Scope,
    strategy: Strategy = ALGORITHMIC,
) -> Counterexample | None:
    """First in-scope input whose solved configuration violates ``prop``,
    or None. Raises ScopeExhaustedUnsolvedError when the strategy fails to
    solve some in-scope input, because an unsolved input is not evidence
    either way."""
    opts = SolveOptions(max_steps=scope.max_steps)
    for counts in scope_inputs(scope):
        trace = solve(element_configuration(counts), strategy, opts)
        if trace.result is not SolveResult.SOLVED:
            raise ScopeExhaustedUnsolvedError(counts, trace.result)
        witnesses = prop.check(trace.final_state)
        if witnesses:
            return Counterexample(counts, trace, witnesses)
    return None


# -- interactive action set checks ------------------------------------------


def explore_ui_states(
    scope: Scope, initial: ConfigurationState | None = None
) -> dict[tuple, tuple[ConfigurationState, list[Action]]]:
    """Breadth-first closure of UI action sequences up to scope.max_steps.

    Returns canonical fact-set key -> (state, shortest action path). UI action
    argument spaces are finite only per state, so this is bounded by depth.
    """
    start = initial if initial is not None else ConfigurationState.empty()
    reached: dict[tuple, tuple[ConfigurationState, list[Action]]] = {
        canonical_state_key(start): (start, [])
    }
    frontier = deque([(start, [], 0)])
    while frontier:
        state, path, depth = frontier.popleft()
        if depth == scope.max_steps:
            continue
        for action in ui_actions(state, detect_violations(state)):
            child = apply_action(state, action)
            key = canonical_state_key(child)
            if key in reached:
                continue
            child_path = path + [action]
            reached[key] = (child, child_path)
            frontier.append((child, child_path, depth + 1))
    return reached


def check_ui_safety(scope: Scope) -> Counterexample | None:
    """Explore every UI sequence up to the scope bound; return a
    counterexample if any reachable state violates a hard constraint (the
    construction API makes that impossible, so this re-derives the claim
    with the raw-fact auditor) or is a dead end with no UI action at all.
    None means every reachable state is hard-clean and extensible."""
    for state, path in explore_ui_states(scope).values():
        if hard_violations(state.facts):
            return Counterexample((0, 0, 0, 0), _trace_of(path), [])
        if not ui_actions(state, detect_violations(state)):
            return Counterexample((0, 0, 0, 0), _trace_of(path), [])
    return None


def _trace_of(path: list[Action]) -> SolveTrace:
    from .engine import TraceStep

    state = ConfigurationState.empty()
    steps = []
    for action in path:
        state = apply_action(state, action)
        steps.append(TraceStep(state.step, action, state))
    return SolveTrace(ConfigurationState.empty(), steps, SolveResult.SOLVED)


def check_ui_completeness(
    target: ConfigurationState, scope: Scope
) -> list[Action] | None:
    """Shortest UI action sequence (from the empty state) whose result is
    isomorphic to ``target``, or None if none exists within the scope.
    Raises InvalidTargetError when the target is not a valid configuration."""
    if hard_violations(target.facts) or not is_valid(target):
        raise InvalidTargetError("target must be a valid configuration")
    target_size = target.object_count
    start = ConfigurationState.empty()
    if isomorphic(start, target):
        return []
    seen = {canonical_state_key(start)}
    frontier = deque([(start, [], 0)])
    while frontier:
        state, path, depth = frontier.popleft()
        if depth == scope.max_steps:
            continue
        for action in ui_actions(state, detect_violations(state)):
            child = apply_action(state, action)
            # facts only grow, so overshooting the target size is final
            if child.object_count > target_size:
                continue
            key = canonical_state_key(child)
            if key in seen:
                continue
            seen.add(key)
            child_path = path + [action]
            if isomorphic(child, target):
                return child_path
            frontier.append((child, child_path, depth + 1))
    return None


# -- isomorphism -------------------------------------------------------------


def _signature(state: ConfigurationState, oid: int) -> tuple:
    """Class plus link-degree profile; invariant under relabeling."""
    cls = state.class_of(oid)
    return (
        cls.value,
        len(state.frames_of_rack(oid)),
        state.rack_of_frame(oid) is not None,
        len(state.modules_of_frame(oid)),
        state.frame_of_module(oid) is not None,
        len(state.modules_of_element(oid)),
        state.element_of_module(oid) is not None,
    )


def isomorphic(a: ConfigurationState, b: ConfigurationState) -> bool:
    """True when some id bijection maps a's facts exactly onto b's,
    preserving classes and all three association kinds."""
    objects_a = sorted(a._index.classes)
    objects_b = sorted(b._index.classes)
    if len(objects_a) != len(objects_b) or len(a.facts) != len(b.facts):
        return False
    sig_a = {o: _signature(a, o) for o in objects_a}
    sig_b = {o: _signature(b, o) for o in objects_b}
    if sorted(sig_a.values()) != sorted(sig_b.values()):
        return False
    candidates = {
        o: [p for p in objects_b if sig_b[p] == sig_a[o]] for o in objects_a
    }
    order = sorted(objects_a, key=lambda o: len(candidates[o]))
    links_b = {f for f in b.facts if isinstance(f, Link)}

    def links_of(state: ConfigurationState, oid: int) -> list[Link]:
        return [
            f
            for f in state.facts
            if isinstance(f, Link) and (f.id1 == oid or f.id2 == oid)
        ]

    mapping: dict[int, int] = {}
    used: set[int] = set()

    def extend(position: int) -> bool:
        if position == len(order):
            return True
        oid = order[position]
        for candidate in candidates[oid]:
            if candidate in used:
                continue
            ok = True
            for link in links_of(a, oid):
                other = link.id2 if link.id1 == oid else link.id1
                if other in mapping:
                    mapped = Link(
                        link.kind,
                        candidate if link.id1 == oid else mapping[other],
                        mapping[other] if link.id1 == oid else candidate,
                    )
                    if mapped not in links_b:
                        ok = False
                        break
            if not ok:
                continue
            mapping[oid] = candidate
            used.add(candidate)
            if extend(position + 1):
                return True
            del mapping[oid]
            used.discard(candidate)
        return False

    return extend(0)
