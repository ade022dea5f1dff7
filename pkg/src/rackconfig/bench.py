"""Benchmark instances, the worst-case domain bound, and the harness.

Instance i (1..20) starts from 4i bare elements, i of each class, ids
grouped A-block..D-block ascending. The domain size bound for instance i is
what the worst-case layout needs: every required module (plus the moduleV
forced per moduleII frame) in its own frame, every frame in its own
RackSingle padded to its exact four frames:

    4i elements + 12i modules + 48i frames + 12i racks = 76i objects

``build_worst_case`` constructs that layout explicitly so the closed formula
can be checked against a counted configuration rather than trusted.

``run_benchmark`` times strategies against instances with a per-run wall
timeout and validates every solved result independently. The
``baseline_generate_and_test`` entry is the monolithic contrast: it searches
over whole candidate configurations (object counts, then assignment maps)
within the domain bound, with no step semantics at all.
"""

from __future__ import annotations

import csv
import io
import resource
import time
from dataclasses import dataclass

from .engine import (
    SolveOptions,
    SolveResult,
    SolveTimeoutError,
    solve,
)
from .model import (
    AssocKind,
    ClassName,
    ConfigurationState,
    ELEMENT_REQUIREMENTS,
    FRAME_MODULE_CAPACITY,
    IsA,
    Link,
    RACK_FRAME_COUNT,
    element_configuration,
    is_valid,
)
from .strategies import Strategy

MAX_INSTANCE = 20

#: Per-instance object breakdown behind the 76i bound, kept symbolic so the
#: construction below and the formula cannot drift apart silently.
_MODULES_PER_I = sum(count for _, count in ELEMENT_REQUIREMENTS.values())  # 10
_MODULE_V_PER_I = ELEMENT_REQUIREMENTS[ClassName.ELEMENT_B][1]  # one per II frame


class InstanceIndexError(ValueError):
    """Benchmark instance index outside 1..20."""


@dataclass(frozen=True)
class Instance:
    index: int
    initial: ConfigurationState
    domainsize: int


@dataclass
class BenchResult:
    strategy: str
    instance: int
    outcome: str  # solved | exhausted | step_bound_reached | timeout | invalid
    wall_time_s: float
    steps: int
    peak_mem_bytes: int


def worst_case_domainsize(i: int) -> int:
    """Objects the worst-case layout of instance i needs (76i)."""
    if i < 1:
        raise InstanceIndexError(f"instance index must be >= 1, got {i}")
    elements = 4 * i
    modules = (_MODULES_PER_I + _MODULE_V_PER_I) * i
    racks = modules
    frames = racks * RACK_FRAME_COUNT[ClassName.RACK_SINGLE]
    return elements + modules + frames + racks


def generate_instance(i: int) -> Instance:
    if not 1 <= i <= MAX_INSTANCE:
        raise InstanceIndexError(
            f"instance index must be in 1..{MAX_INSTANCE}, got {i}"
        )
    return Instance(i, element_configuration((i, i, i, i)), worst_case_domainsize(i))


def build_worst_case(i: int) -> ConfigurationState:
    """The worst-case layout as an explicit fact set: frames and elements
    share no modules, each module sits in its own frame, each frame in its
    own RackSingle padded to exactly four frames. Hard-constraint-clean by
    construction; deliberately not a *valid* configuration (the lone
    moduleIIs lack their moduleV companions), because it is a domain-size
    bound, not a solution."""
    if i < 1:
        raise InstanceIndexError(f"instance index must be >= 1, got {i}")
    facts: list = []
    next_id = 1

    def fresh() -> int:
        nonlocal next_id
        oid = next_id
        next_id += 1
        return oid

    modules: list[int] = []
    for element_class, (module_class, count) in ELEMENT_REQUIREMENTS.items():
        for _ in range(i):
            element = fresh()
            facts.append(IsA(element, element_class))
            for _ in range(count):
                module = fresh()
                facts.append(IsA(module, module_class))
                facts.append(Link(AssocKind.ELEMENT_MODULE, element, module))
                modules.append(module)
    for _ in range(_MODULE_V_PER_I * i):
        module = fresh()
        facts.append(IsA(module, ClassName.MODULE_V))
        modules.append(module)
    for module in modules:
        frame = fresh()
        facts.append(IsA(frame, ClassName.FRAME))
        facts.append(Link(AssocKind.FRAME_MODULE, frame, module))
        rack = fresh()
        facts.append(IsA(rack, ClassName.RACK_SINGLE))
        facts.append(Link(AssocKind.RACK_FRAME, rack, frame))
        for _ in range(RACK_FRAME_COUNT[ClassName.RACK_SINGLE] - 1):
            padding = fresh()
            facts.append(IsA(padding, ClassName.FRAME))
            facts.append(Link(AssocKind.RACK_FRAME, rack, padding))
    return ConfigurationState.from_facts(facts)


def _peak_mem_bytes() -> int:
    # ru_maxrss is the process high-water mark in KiB on Linux; best effort.
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024


def run_benchmark(
    strategies: list[Strategy],
    instances: list[int],
    timeout_s: float = 600.0,
    max_steps: int = 500,
) -> list[BenchResult]:
    """Run every (strategy, instance) pair with a per-run wall timeout,
    validating each solved result against the configuration checker."""
    results: list[BenchResult] = []
    for strategy in strategies:
        for index in instances:
            instance = generate_instance(index)
            opts = SolveOptions(
                max_steps=max_steps, deadline=time.monotonic() + timeout_s
            )
            started = time.perf_counter()
            try:
                trace = solve(instance.initial, strategy, opts)
            except SolveTimeoutError:
                results.append(
                    BenchResult(
                        strategy.name,
                        index,
                        "timeout",
                        time.perf_counter() - started,
                        0,
                        _peak_mem_bytes(),
                    )
                )
                continue
            elapsed = time.perf_counter() - started
            outcome = trace.result.value
            if trace.result is SolveResult.SOLVED and not is_valid(trace.final_state):
                outcome = "invalid"  # never expected; the validation gate
            results.append(
                BenchResult(
                    strategy.name, index, outcome, elapsed, len(trace), _peak_mem_bytes()
                )
            )
    return results


def results_to_csv(results: list[BenchResult]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(
        ["strategy", "instance", "outcome", "wall_time_s", "steps", "peak_mem_bytes"]
    )
    for r in results:
        writer.writerow(
            [r.strategy, r.instance, r.outcome, f"{r.wall_time_s:.3f}", r.steps, r.peak_mem_bytes]
        )
    return buffer.getvalue()


def summarize(results: list[BenchResult]) -> str:
    """Per-strategy table: instances solved, total wall time, mean peak
    memory over its runs."""
    names = []
    for r in results:
        if r.strategy not in names:
            names.append(r.strategy)
    lines = ["strategy      solved  total_time_s  mean_peak_mem_mb"]
    for name in names:
        mine = [r for r in results if r.strategy == name]
        solved = sum(1 for r in mine if r.outcome == "solved")
        total = sum(r.wall_time_s for r in mine)
        mem = sum(r.peak_mem_bytes for r in mine) / len(mine) / (1024 * 1024)
        lines.append(f"{name:<13} {solved:>6}  {total:>12.2f}  {mem:>16.1f}")
    return "\n".join(lines) + "\n"


# -- monolithic baseline -----------------------------------------------------


@dataclass
class BaselineResult:
    outcome: str  # solved | exhausted | timeout
    configuration: ConfigurationState | None
    wall_time_s: float


def baseline_generate_and_test(
    instance: Instance, timeout_s: float = 600.0
) -> BaselineResult:
    """Monolithic bounded search: enumerate whole candidate configuration
    shapes within the instance's domain-size bound, smallest object count
    first, pack each shape deterministically, and test the complete
    candidate for validity. No step semantics; a candidate either is a
    valid configuration or is discarded.

    A shape fixes the free structural choices: how many frames host the
    moduleIIs (which fixes the moduleV count) and the RackSingle/RackDouble
    mix. Everything else (module counts, element links, frames per rack) is
    forced by the domain's exact-count rules.
    """
    deadline = time.monotonic() + timeout_s
    started = time.perf_counter()
    initial = instance.initial
    counts: dict[ClassName, int] = {}
    for oid in initial.objects_of(ELEMENT_REQUIREMENTS.keys()):
        cls = initial.class_of(oid)
        counts[cls] = counts.get(cls, 0) + 1
    elements = initial.object_count
    demand = {
        module_class: counts.get(element_class, 0) * required
        for element_class, (module_class, required) in ELEMENT_REQUIREMENTS.items()
    }
    module_total = sum(demand.values())
    ii_count = demand.get(ClassName.MODULE_II, 0)

    def elapsed() -> float:
        return time.perf_counter() - started

    min_v = -(-ii_count // (FRAME_MODULE_CAPACITY - 1)) if ii_count else 0
    shapes: list[tuple[int, int, int, int]] = []
    for v_frames in range(min_v, max(ii_count, min_v) + 1):
        spare_in_v_frames = v_frames * (FRAME_MODULE_CAPACITY - 1) - ii_count
        other_modules = module_total - ii_count
        overflow = max(0, other_modules - max(0, spare_in_v_frames))
        frames_needed = v_frames + -(-overflow // FRAME_MODULE_CAPACITY)
        max_singles = -(-frames_needed // RACK_FRAME_COUNT[ClassName.RACK_SINGLE])
        max_doubles = -(-frames_needed // RACK_FRAME_COUNT[ClassName.RACK_DOUBLE])
        for singles in range(0, max_singles + 1):
            for doubles in range(0, max_doubles + 1):
                frame_slots = (
                    singles * RACK_FRAME_COUNT[ClassName.RACK_SINGLE]
                    + doubles * RACK_FRAME_COUNT[ClassName.RACK_DOUBLE]
                )
                if frame_slots < frames_needed:
                    continue
                total_objects = (
                    elements
                    + module_total
                    + v_frames
                    + frame_slots
                    + singles
                    + doubles
                )
                if total_objects > instance.domainsize:
                    continue
                shapes.append((total_objects, v_frames, singles, doubles))
    shapes.sort()
    for _total, v_frames, singles, doubles in shapes:
        if time.monotonic() > deadline:
            return BaselineResult("timeout", None, elapsed())
        candidate = _assemble_candidate(initial, v_frames, singles, doubles)
        if candidate is not None and is_valid(candidate):
            return BaselineResult("solved", candidate, elapsed())
    return BaselineResult("exhausted", None, elapsed())


def _assemble_candidate(
    initial: ConfigurationState,
    v_frames: int,
    singles: int,
    doubles: int,
) -> ConfigurationState | None:
    """Deterministic packing of one candidate shape; None when the shape
    cannot be packed. Every moduleV-hosting frame gets at least one
    moduleII before the remaining moduleIIs are spread first-fit."""
    state = initial
    modules: list[tuple[int, ClassName]] = []
    for element in initial.objects_of(ELEMENT_REQUIREMENTS.keys()):
        module_class, required = ELEMENT_REQUIREMENTS[initial.class_of(element)]
        for _ in range(required):
            state, module = state.create_object(module_class)
            state = state.associate(AssocKind.ELEMENT_MODULE, element, module)
            modules.append((module, module_class))
    v_ids = []
    for _ in range(v_frames):
        state, v_id = state.create_object(ClassName.MODULE_V)
        v_ids.append(v_id)
    frames: list[int] = []
    for rack_class, count in (
        (ClassName.RACK_SINGLE, singles),
        (ClassName.RACK_DOUBLE, doubles),
    ):
        for _ in range(count):
            state, rack = state.create_object(rack_class)
            for _ in range(RACK_FRAME_COUNT[rack_class]):
                state, frame = state.create_object(ClassName.FRAME)
                state = state.associate(AssocKind.RACK_FRAME, rack, frame)
                frames.append(frame)
    ii_modules = [m for m, cls in modules if cls is ClassName.MODULE_II]
    if v_frames > len(frames) or v_frames > len(ii_modules):
        return None
    others = [m for m, cls in modules if cls is not ClassName.MODULE_II]
    free = {f: FRAME_MODULE_CAPACITY for f in frames}
    host_frames = frames[:v_frames]
    for frame, v_id in zip(host_frames, v_ids):
        state = state.associate(AssocKind.FRAME_MODULE, frame, v_id)
        free[frame] -= 1
    remaining_ii = list(ii_modules)
    for frame in host_frames:  # each host frame needs at least one moduleII
        module = remaining_ii.pop(0)
        state = state.associate(AssocKind.FRAME_MODULE, frame, module)
        free[frame] -= 1
    for module in remaining_ii:
        target = next((f for f in host_frames if free[f] >= 1), None)
        if target is None:
            return None
        state = state.associate(AssocKind.FRAME_MODULE, target, module)
        free[target] -= 1
    for module in others:
        target = next((f for f in frames if free[f] >= 1), None)
        if target is None:
            return None
        state = state.associate(AssocKind.FRAME_MODULE, target, module)
        free[target] -= 1
    return state
