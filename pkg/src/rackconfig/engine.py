"""Step engine: drives a strategy from an initial state to a valid one.

The engine owns step semantics: at each step the current violations are
computed, the strategy proposes repair actions, exactly one is applied, and
the step counter advances. ``solve`` searches over those choices:

* Deterministic strategies (at most one action per state) run as a straight
  loop; a dead end ends the search immediately.
* Nondeterministic strategies run depth-first iterative deepening over trace
  length with chronological backtracking in the strategy's canonical action
  order. Branches are pruned when an admissible lower bound on the number of
  facts still required exceeds what the remaining steps could possibly add,
  which keeps unbounded creation chains (rack after rack after rack) from
  swallowing the search and makes the first solution found a shortest one.

Monotonicity is structural: actions only add facts, so a trace's states form
a growing chain.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field
from enum import Enum

from .actions import Action, InapplicableActionError, apply_action
from .model import (
    ClassName,
    ConfigurationError,
    ConfigurationState,
    ELEMENT_REQUIREMENTS,
    FRAME_MODULE_CAPACITY,
    MODULE_CLASSES,
    RACK_FRAME_COUNT,
    Violation,
    detect_violations,
    fact_sort_key,
    hard_violations,
)
from .strategies import Strategy


class InvalidInitialStateError(ConfigurationError):
    """The initial state violates a hard constraint (only possible for
    hand-assembled fact sets that bypassed the construction API)."""


class SolveTimeoutError(ConfigurationError):
    """The cooperative deadline in SolveOptions expired mid-search."""


class SolveResult(Enum):
    SOLVED = "solved"
    EXHAUSTED = "exhausted"
    STEP_BOUND_REACHED = "step_bound_reached"


@dataclass
class SolveOptions:
    """Search limits.

    max_steps bounds trace length; the default comfortably covers the
    deterministic strategy on every benchmark instance. node_budget caps
    total expansions across deepening iterations (exceeding it reports
    STEP_BOUND_REACHED). deadline is an optional time.monotonic() timestamp;
    passing it raises SolveTimeoutError. visited_state_pruning deduplicates
    revisited states within one deepening iteration by canonicalized fact
    set; off by default.
    """

    max_steps: int = 500
    visited_state_pruning: bool = False
    node_budget: int | None = None
    deadline: float | None = None


@dataclass(frozen=True)
class TraceStep:
    index: int
    action: Action
    state: ConfigurationState


@dataclass
class SolveTrace:
    """Outcome of a solve run: the initial state, every applied step with
    its resulting state, and the overall result."""

    initial: ConfigurationState
    steps: list[TraceStep] = field(default_factory=list)
    result: SolveResult = SolveResult.EXHAUSTED

    @property
    def final_state(self) -> ConfigurationState:
        return self.steps[-1].state if self.steps else self.initial

    @property
    def actions(self) -> list[Action]:
        return [s.action for s in self.steps]

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class Solved:
    state: ConfigurationState


@dataclass(frozen=True)
class Continue:
    state: ConfigurationState
    chosen: Action
    alternatives_remaining: int


@dataclass(frozen=True)
class DeadEnd:
    state: ConfigurationState


StepOutcome = Solved | Continue | DeadEnd


def step(
    state: ConfigurationState, strategy: Strategy
) -> tuple[frozenset[Violation], list[Action]]:
    """Violations of the current state and the strategy's repair actions
    for them. A valid state yields no actions: there is nothing to repair."""
    violations = detect_violations(state)
    if not violations:
        return violations, []
    return violations, strategy.generate(state, violations)


def advance(state: ConfigurationState, strategy: Strategy) -> StepOutcome:
    """Apply the first canonical action once; Solved / Continue / DeadEnd."""
    violations, actions = step(state, strategy)
    if not violations:
        return Solved(state)
    if not actions:
        return DeadEnd(state)
    return Continue(apply_action(state, actions[0]), actions[0], len(actions) - 1)


def canonical_state_key(state: ConfigurationState) -> tuple:
    """Hashable identity of a state's fact set (sorted fact list)."""
    return tuple(sorted(state.facts, key=fact_sort_key))


def remaining_fact_lower_bound(state: ConfigurationState) -> int:
    """Admissible lower bound on how many facts any valid extension of
    ``state`` must still add.

    Each term counts facts of a distinct category (module/frame/rack
    creations, element-module / frame-module / rack-frame links), using only
    counting arguments that every solution must satisfy, so the sum never
    overestimates. The moduleII/moduleV coupling enters as a module-count
    bound: every frame that ends up hosting moduleIIs needs its own placed
    moduleV, and frames already hosting a moduleII stay hosts. Unplaced or
    still-to-create moduleIIs beyond the spare capacity of current hosts
    (their free slots, one reserved for a missing moduleV) force extra
    hosts at no more than 4 moduleIIs each. Only well-placed moduleVs
    (sharing a frame with a moduleII) or still unplaced ones can serve a
    host; the shortfall must be created.
    """
    idx = state._index
    demand: dict[ClassName, int] = {}
    pool: dict[ClassName, int] = {}
    em_links = 0
    unframed = 0
    free_slots = 0
    unracked = 0
    rack_deficit = 0
    ii_existing = 0
    ii_unplaced = 0
    v_unplaced = 0
    for oid, cls in idx.classes.items():
        if cls in ELEMENT_REQUIREMENTS:
            module_class, required = ELEMENT_REQUIREMENTS[cls]
            missing = required - len(idx.modules_of_element.get(oid, []))
            if missing > 0:
                em_links += missing
                demand[module_class] = demand.get(module_class, 0) + missing
        elif cls in MODULE_CLASSES:
            if oid not in idx.frame_of_module:
                unframed += 1
                if cls is ClassName.MODULE_V:
                    v_unplaced += 1
                elif cls is ClassName.MODULE_II:
                    ii_unplaced += 1
            if oid not in idx.element_of_module:
                pool[cls] = pool.get(cls, 0) + 1
            if cls is ClassName.MODULE_II:
                ii_existing += 1
        elif cls is ClassName.FRAME:
            free_slots += FRAME_MODULE_CAPACITY - len(
                idx.modules_of_frame.get(oid, [])
            )
            if oid not in idx.rack_of_frame:
                unracked += 1
        elif cls in RACK_FRAME_COUNT:
            rack_deficit += RACK_FRAME_COUNT[cls] - len(
                idx.frames_of_rack.get(oid, [])
            )
    new_modules = sum(
        max(0, count - pool.get(module_class, 0))
        for module_class, count in demand.items()
    )
    ii_final = ii_existing + max(
        0, demand.get(ClassName.MODULE_II, 0) - pool.get(ClassName.MODULE_II, 0)
    )
    if ii_final:
        ii_frames = 0
        good_frames = 0
        host_capacity = 0
        for modules in idx.modules_of_frame.values():
            if not any(idx.classes[m] is ClassName.MODULE_II for m in modules):
                continue
            ii_frames += 1
            has_v = any(idx.classes[m] is ClassName.MODULE_V for m in modules)
            if has_v:
                good_frames += 1
            free = FRAME_MODULE_CAPACITY - len(modules)
            host_capacity += max(0, free - (0 if has_v else 1))
        unhosted = ii_unplaced + max(
            0,
            demand.get(ClassName.MODULE_II, 0)
            - pool.get(ClassName.MODULE_II, 0),
        )
        extra_hosts = -(
            -max(0, unhosted - host_capacity) // (FRAME_MODULE_CAPACITY - 1)
        )
        hosts = ii_frames + extra_hosts
        new_modules += max(0, hosts - good_frames - v_unplaced)
    fm_links = unframed + new_modules
    frames_for_modules = max(
        0, -(-(fm_links - free_slots) // FRAME_MODULE_CAPACITY)
    )
    # Exact frame/rack tail. Any completion creates N new frames and a rack
    # mix of s singles and d doubles; every existing deficit closes, every
    # new rack fills exactly, and every new or currently unracked frame gets
    # exactly one rack link, so unracked + N = rack_deficit + 4s + 8d and
    # the tail adds N + s + d + (rack_deficit + 4s + 8d) facts. Minimising
    # over mixes with N >= frames_for_modules gives the bound.
    coverage = max(0, frames_for_modules + unracked - rack_deficit)
    tail = None
    for doubles in range(0, -(-coverage // 8) + 1):
        singles = max(0, -(-(coverage - 8 * doubles) // 4))
        cost = 2 * rack_deficit - unracked + 9 * singles + 17 * doubles
        if tail is None or cost < tail:
            tail = cost
    return em_links + new_modules + fm_links + tail


def unextendable(state: ConfigurationState) -> bool:
    """True when provably no extension of ``state`` is valid: a full frame
    pairing moduleIIs with a missing moduleV (or the reverse) can never be
    repaired, because links are immutable and the frame has no slot left."""
    idx = state._index
    for modules in idx.modules_of_frame.values():
        if len(modules) < FRAME_MODULE_CAPACITY:
            continue
        has_ii = any(idx.classes[m] is ClassName.MODULE_II for m in modules)
        has_v = any(idx.classes[m] is ClassName.MODULE_V for m in modules)
        if has_ii != has_v:
            return True
    return False


def _check_limits(opts: SolveOptions, nodes: int) -> None:
    if opts.deadline is not None and time.monotonic() > opts.deadline:
        raise SolveTimeoutError("solve deadline exceeded")
    if opts.node_budget is not None and nodes > opts.node_budget:
        raise _BudgetExceeded


class _BudgetExceeded(Exception):
    pass


def solve(
    initial: ConfigurationState,
    strategy: Strategy,
    opts: SolveOptions | None = None,
) -> SolveTrace:
    """Search for a violation-free state reachable from ``initial``.

    Returns a SOLVED trace (first solution in canonical order, shortest
    first for nondeterministic strategies), EXHAUSTED when the whole space
    below max_steps was explored without one, or STEP_BOUND_REACHED when
    the search was cut off by max_steps or node_budget.
    """
    opts = opts or SolveOptions()
    hard = hard_violations(initial.facts)
    if hard:
        raise InvalidInitialStateError(
            f"initial state violates {hard[0][0].value} for {hard[0][1]}"
        )
    if strategy.deterministic:
        return _solve_deterministic(initial, strategy, opts)
    return _solve_deepening(initial, strategy, opts)


def _solve_deterministic(
    initial: ConfigurationState, strategy: Strategy, opts: SolveOptions
) -> SolveTrace:
    trace = SolveTrace(initial)
    state = initial
    nodes = 0
    while True:
        nodes += 1
        if opts.deadline is not None and time.monotonic() > opts.deadline:
            raise SolveTimeoutError("solve deadline exceeded")
        if opts.node_budget is not None and nodes > opts.node_budget:
            trace.result = SolveResult.STEP_BOUND_REACHED
            return trace
        outcome = advance(state, strategy)
        if isinstance(outcome, Solved):
            trace.result = SolveResult.SOLVED
            return trace
        if isinstance(outcome, DeadEnd):
            trace.result = SolveResult.EXHAUSTED
            return trace
        if len(trace.steps) >= opts.max_steps:
            trace.result = SolveResult.STEP_BOUND_REACHED
            return trace
        state = outcome.state
        trace.steps.append(TraceStep(state.step, outcome.chosen, state))


def _solve_deepening(
    initial: ConfigurationState, strategy: Strategy, opts: SolveOptions
) -> SolveTrace:
    if not detect_violations(initial):
        return SolveTrace(initial, [], SolveResult.SOLVED)
    bound_per_step = strategy.max_facts_per_action
    start = max(1, -(-remaining_fact_lower_bound(initial) // bound_per_step))
    floor_fn = strategy.steps_floor
    if floor_fn is not None:
        floor = floor_fn(initial)
        if floor is None:
            return SolveTrace(initial, [], SolveResult.EXHAUSTED)
        start = max(start, floor)
    nodes = 0
    cutoff = False
    if opts.max_steps + 16 > sys.getrecursionlimit() - 64:
        sys.setrecursionlimit(opts.max_steps + 128)

    def dfs(
        state: ConfigurationState,
        depth: int,
        limit: int,
        visited: dict[tuple, int] | None,
    ) -> list[TraceStep] | None:
        nonlocal nodes, cutoff
        nodes += 1
        _check_limits(opts, nodes)
        violations = detect_violations(state)
        if not violations:
            return []
        if unextendable(state):
            return None  # dead subtree, not a cutoff: no completion exists
        if depth == limit:
            cutoff = True
            return None
        if remaining_fact_lower_bound(state) > (limit - depth) * bound_per_step:
            cutoff = True
            return None
        if floor_fn is not None:
            floor = floor_fn(state)
            if floor is None:
                return None  # unreachable goal under this action set
            if floor > limit - depth:
                cutoff = True
                return None
        if visited is not None:
            key = canonical_state_key(state)
            seen = visited.get(key)
            if seen is not None and seen <= depth:
                return None
            visited[key] = depth
        actions = strategy.generate(state, violations)
        for action in actions:
            child = apply_action(state, action)
            rest = dfs(child, depth + 1, limit, visited)
            if rest is not None:
                return [TraceStep(child.step, action, child)] + rest
        return None

    if start > opts.max_steps:
        return SolveTrace(initial, [], SolveResult.STEP_BOUND_REACHED)
    for limit in range(start, opts.max_steps + 1):
        cutoff = False
        visited = {} if opts.visited_state_pruning else None
        try:
            steps = dfs(initial, 0, limit, visited)
        except _BudgetExceeded:
            return SolveTrace(initial, [], SolveResult.STEP_BOUND_REACHED)
        if steps is not None:
            return SolveTrace(initial, steps, SolveResult.SOLVED)
        if not cutoff:
            return SolveTrace(initial, [], SolveResult.EXHAUSTED)
    return SolveTrace(initial, [], SolveResult.STEP_BOUND_REACHED)


def replay(initial: ConfigurationState, actions: list[Action]) -> ConfigurationState:
    """Re-apply a recorded action list; raises InapplicableActionError with
    the failing step index if the actions do not fit."""
    state = initial
    for offset, action in enumerate(actions, start=1):
        try:
            state = apply_action(state, action)
        except InapplicableActionError as exc:
            raise InapplicableActionError(
                f"replay failed at step {initial.step + offset}: {exc}",
                step=initial.step + offset,
            ) from exc
    return state
