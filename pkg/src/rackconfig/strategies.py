"""Repair strategies: how violations turn into candidate actions.

All four strategies share one contract: given a state and its current
violations, return the applicable repair actions in canonical order (action
constructor order, then ascending subject id, then existing targets
ascending with "create a new target" last). They differ in granularity:

* generic      - primitive moves: create any single leaf-class object, or add
                 any single hard-constraint-safe association. Maximal search
                 space, one fact per step.
* ordered      - domain repairs in four priority levels (element modules,
                 module placement, frame racking, rack fill-up); only the
                 lowest applicable level is offered, targets stay open.
* algorithmic  - the deterministic first-choice restriction of ordered:
                 lowest pending subject, lowest usable target, new RackSingle
                 when no rack fits. At most one action per state.
* ui           - end-user moves: create an element, create a rack complete
                 with its frames, or assign an element's modules into one
                 rack's frames. Available even on valid states, so a session
                 can keep growing a finished configuration.

Any action that places a moduleII into a frame also ensures that frame ends
up with exactly one moduleV, creating one when needed; capacity checks
account for that extra slot.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .actions import NEW, Action, ActionKind
from .model import (
    AssocKind,
    ClassName,
    ConfigurationError,
    ConfigurationState,
    ELEMENT_CLASSES,
    ELEMENT_REQUIREMENTS,
    FRAME_MODULE_CAPACITY,
    IsA,
    LEAF_CLASSES,
    Link,
    MODULE_CLASSES,
    RACK_CLASSES,
    RACK_FRAME_COUNT,
    Violation,
    ViolationKind,
)

GenerateFn = Callable[[ConfigurationState, frozenset[Violation]], list[Action]]
StepsFloorFn = Callable[[ConfigurationState], "int | None"]


class UnknownStrategyError(ConfigurationError):
    """Strategy name not in the registry."""


@dataclass(frozen=True)
class Strategy:
    """A named action generator plus the engine-relevant traits: whether it
    is deterministic (at most one action per state), the most facts any
    single action of it can add (used for sound search pruning), whether it
    still offers actions on valid states (interactive use), and optionally
    a steps_floor: an admissible lower bound on the remaining actions, with
    None meaning no sequence of this strategy's actions can ever finish."""

    name: str
    generate: GenerateFn = field(compare=False)
    deterministic: bool = False
    max_facts_per_action: int = 1
    offers_actions_when_valid: bool = False
    steps_floor: StepsFloorFn | None = field(default=None, compare=False)


# -- generic ---------------------------------------------------------------


def generic_actions(
    state: ConfigurationState, violations: frozenset[Violation]
) -> list[Action]:
    """Every primitive move: one CreateObject per leaf class, plus every
    hard-constraint-safe association between existing objects."""
    actions = [
        Action(ActionKind.CREATE_OBJECT, (cls,), (IsA(state.next_id, cls),))
        for cls in LEAF_CLASSES
    ]
    racks = state.objects_of(RACK_CLASSES)
    frames = state.objects_of([ClassName.FRAME])
    modules = state.objects_of(MODULE_CLASSES)
    elements = state.objects_of(ELEMENT_CLASSES)
    pairs = itertools.chain(
        ((AssocKind.RACK_FRAME, r, f) for r in racks for f in frames),
        ((AssocKind.FRAME_MODULE, f, m) for f in frames for m in modules),
        ((AssocKind.ELEMENT_MODULE, e, m) for e in elements for m in modules),
    )
    for kind, id1, id2 in pairs:
        if state.can_associate(kind, id1, id2):
            actions.append(
                Action(
                    ActionKind.ASSOCIATE,
                    (kind, id1, id2),
                    (Link(kind, id1, id2),),
                )
            )
    return actions


# -- ordered ---------------------------------------------------------------


def _pending(violations: frozenset[Violation], kind: ViolationKind) -> list[Violation]:
    return sorted((v for v in violations if v.kind is kind), key=lambda v: v.subject)


def _frame_usable_for(state: ConfigurationState, frame: int, module_class: ClassName) -> bool:
    free = state.frame_free_slots(frame)
    if module_class is ClassName.MODULE_II:
        if state.frame_has_module_of(frame, ClassName.MODULE_V):
            return free >= 1
        return free >= 2
    if module_class is ClassName.MODULE_V:
        return free >= 1 and not state.frame_has_module_of(frame, ClassName.MODULE_V)
    return free >= 1


def _create_modules_action(state: ConfigurationState, element: int) -> Action:
    module_class, required = ELEMENT_REQUIREMENTS[state.class_of(element)]
    missing = required - len(state.modules_of_element(element))
    effects: list = []
    next_id = state.next_id
    for _ in range(missing):
        effects.append(IsA(next_id, module_class))
        effects.append(Link(AssocKind.ELEMENT_MODULE, element, next_id))
        next_id += 1
    return Action(ActionKind.CREATE_MODULES_FOR_ELEMENT, (element,), tuple(effects))


def _place_module_effects(
    state: ConfigurationState, module: int, frame: int | None
) -> tuple:
    """Effects of putting one module into an existing frame (id) or a new
    one (None), including the moduleV a moduleII placement may require."""
    module_class = state.class_of(module)
    effects: list = []
    next_id = state.next_id
    if frame is None:
        frame = next_id
        effects.append(IsA(frame, ClassName.FRAME))
        next_id += 1
        frame_has_v = False
    else:
        frame_has_v = state.frame_has_module_of(frame, ClassName.MODULE_V)
    effects.append(Link(AssocKind.FRAME_MODULE, frame, module))
    if module_class is ClassName.MODULE_II and not frame_has_v:
        effects.append(IsA(next_id, ClassName.MODULE_V))
        effects.append(Link(AssocKind.FRAME_MODULE, frame, next_id))
    return tuple(effects)


def _frame_targets(state: ConfigurationState, module: int) -> Iterator[int | None]:
    module_class = state.class_of(module)
    for frame in state.objects_of([ClassName.FRAME]):
        if _frame_usable_for(state, frame, module_class):
            yield frame
    yield None


def _rack_targets(state: ConfigurationState) -> Iterator[int | tuple]:
    for rack in state.objects_of(RACK_CLASSES):
        if len(state.frames_of_rack(rack)) < RACK_FRAME_COUNT[state.class_of(rack)]:
            yield rack
    yield (NEW, ClassName.RACK_SINGLE)
    yield (NEW, ClassName.RACK_DOUBLE)


def _rack_for_frame_action(
    state: ConfigurationState, frame: int, target: int | tuple
) -> Action:
    if isinstance(target, tuple):
        rack = state.next_id
        effects = (IsA(rack, target[1]), Link(AssocKind.RACK_FRAME, rack, frame))
    else:
        effects = (Link(AssocKind.RACK_FRAME, target, frame),)
    return Action(ActionKind.CREATE_RACK_FOR_FRAME, (frame, target), effects)


def _fill_rack_action(state: ConfigurationState, rack: int) -> Action:
    missing = RACK_FRAME_COUNT[state.class_of(rack)] - len(state.frames_of_rack(rack))
    effects: list = []
    next_id = state.next_id
    for _ in range(missing):
        effects.append(IsA(next_id, ClassName.FRAME))
        effects.append(Link(AssocKind.RACK_FRAME, rack, next_id))
        next_id += 1
    return Action(ActionKind.CREATE_FRAMES_FOR_RACK, (rack,), tuple(effects))


def ordered_actions(
    state: ConfigurationState, violations: frozenset[Violation]
) -> list[Action]:
    """Domain repairs of the lowest applicable priority level.

    Levels, lowest first: create an element's missing modules; place a
    pending module into a frame (each usable frame, then a new one); put a
    pending frame into a rack (each rack with room, then a new RackSingle or
    RackDouble); create every frame a rack still needs in one move.
    """
    level1 = _pending(violations, ViolationKind.ELEMENT_NEEDS_MODULES)
    if level1:
        return [_create_modules_action(state, v.subject) for v in level1]
    level2 = _pending(violations, ViolationKind.MODULE_NEEDS_FRAME)
    if level2:
        return [
            Action(
                ActionKind.CREATE_FRAME_FOR_MODULE,
                (v.subject, target if target is not None else NEW),
                _place_module_effects(state, v.subject, target),
            )
            for v in level2
            for target in _frame_targets(state, v.subject)
        ]
    level3 = _pending(violations, ViolationKind.FRAME_NEEDS_RACK)
    if level3:
        return [
            _rack_for_frame_action(state, v.subject, target)
            for v in level3
            for target in _rack_targets(state)
        ]
    level4 = _pending(violations, ViolationKind.RACK_NEEDS_MORE_FRAMES)
    if level4:
        return [_fill_rack_action(state, v.subject) for v in level4]
    return []


# -- algorithmic -----------------------------------------------------------


def first_usable_rack(state: ConfigurationState) -> int | None:
    """Smallest-id rack that can still accept a frame, or None."""
    for rack in state.objects_of(RACK_CLASSES):
        if len(state.frames_of_rack(rack)) < RACK_FRAME_COUNT[state.class_of(rack)]:
            return rack
    return None


def algorithmic_action(
    state: ConfigurationState, violations: frozenset[Violation]
) -> Action | None:
    """The single deterministic choice: the first ordered action, which by
    the canonical order is the lowest pending subject repaired against the
    lowest usable target (first_usable_rack for frames), or a fresh object
    (RackSingle for racks) when nothing usable exists."""
    candidates = ordered_actions(state, violations)
    return candidates[0] if candidates else None


def _algorithmic_generate(
    state: ConfigurationState, violations: frozenset[Violation]
) -> list[Action]:
    action = algorithmic_action(state, violations)
    return [action] if action is not None else []


# -- ui ----------------------------------------------------------------------


def _create_rack_action(state: ConfigurationState, rack_class: ClassName) -> Action:
    rack = state.next_id
    effects: list = [IsA(rack, rack_class)]
    for offset in range(RACK_FRAME_COUNT[rack_class]):
        frame = rack + 1 + offset
        effects.append(IsA(frame, ClassName.FRAME))
        effects.append(Link(AssocKind.RACK_FRAME, rack, frame))
    return Action(ActionKind.CREATE_RACK, (rack_class,), tuple(effects))


def _assignment_effects(
    state: ConfigurationState, element: int, rack: int
) -> tuple | None:
    """Plan moving all of an element's unplaced modules (creating missing
    ones) into one rack's frames, lowest-id frame with room first. None when
    the rack cannot take them all."""
    module_class, required = ELEMENT_REQUIREMENTS[state.class_of(element)]
    linked = state.modules_of_element(element)
    unplaced = [m for m in linked if state.frame_of_module(m) is None]
    missing = required - len(linked)
    if missing <= 0 and not unplaced:
        return None
    effects: list = []
    next_id = state.next_id
    new_modules: list[int] = []
    for _ in range(missing):
        effects.append(IsA(next_id, module_class))
        effects.append(Link(AssocKind.ELEMENT_MODULE, element, next_id))
        new_modules.append(next_id)
        next_id += 1
    frames = state.frames_of_rack(rack)
    free = {f: state.frame_free_slots(f) for f in frames}
    has_v = {
        f: state.frame_has_module_of(f, ClassName.MODULE_V) for f in frames
    }
    for module in unplaced + new_modules:
        placed = False
        for frame in frames:
            if module_class is ClassName.MODULE_II and not has_v[frame]:
                if free[frame] >= 2:
                    effects.append(Link(AssocKind.FRAME_MODULE, frame, module))
                    effects.append(IsA(next_id, ClassName.MODULE_V))
                    effects.append(Link(AssocKind.FRAME_MODULE, frame, next_id))
                    free[frame] -= 2
                    has_v[frame] = True
                    next_id += 1
                    placed = True
                    break
            elif free[frame] >= 1:
                effects.append(Link(AssocKind.FRAME_MODULE, frame, module))
                free[frame] -= 1
                placed = True
                break
        if not placed:
            return None
    return tuple(effects)


def ui_actions(
    state: ConfigurationState, violations: frozenset[Violation]
) -> list[Action]:
    """End-user moves. Unlike the repair strategies these are offered on any
    state, valid or not: creating objects is always allowed, assignment only
    where one rack really can take everything the element still needs."""
    actions = [
        Action(ActionKind.CREATE_ELEMENT, (cls,), (IsA(state.next_id, cls),))
        for cls in LEAF_CLASSES
        if cls in ELEMENT_CLASSES
    ]
    actions += [
        _create_rack_action(state, cls)
        for cls in (ClassName.RACK_SINGLE, ClassName.RACK_DOUBLE)
    ]
    for element in state.objects_of(ELEMENT_CLASSES):
        for rack in state.objects_of(RACK_CLASSES):
            effects = _assignment_effects(state, element, rack)
            if effects is not None:
                actions.append(
                    Action(
                        ActionKind.ASSIGN_ELEMENT_TO_RACK,
                        (element, rack),
                        effects,
                    )
                )
    return actions


# -- admissible step floors ---------------------------------------------------

_MAX_RACK_SLOTS = RACK_FRAME_COUNT[ClassName.RACK_DOUBLE] * FRAME_MODULE_CAPACITY


def ordered_steps_floor(state: ConfigurationState) -> int | None:
    """Lower bound on remaining ordered actions.

    One action per element still missing modules, one per module placement
    (a moduleII brings its moduleV along, so moduleVs cost no extra step),
    one per frame that must be racked individually (level 3 racks exactly
    one frame, and fill-created frames never host placements because the
    level gate runs fills only after every module is placed), plus one fill
    whenever the minimal frame count cannot land exactly on the rack-sized
    blocks that remain.
    """
    idx = state._index
    elements_pending = 0
    missing_total = 0
    missing_ii = 0
    unplaced = 0
    ii_existing = 0
    v_existing = 0
    free_slots = 0
    unracked = 0
    rack_deficit = 0
    for oid, cls in idx.classes.items():
        if cls in ELEMENT_REQUIREMENTS:
            module_class, required = ELEMENT_REQUIREMENTS[cls]
            missing = required - len(idx.modules_of_element.get(oid, []))
            if missing > 0:
                elements_pending += 1
                missing_total += missing
                if module_class is ClassName.MODULE_II:
                    missing_ii += missing
        elif cls in MODULE_CLASSES:
            if oid not in idx.frame_of_module:
                unplaced += 1
            if cls is ClassName.MODULE_II:
                ii_existing += 1
            elif cls is ClassName.MODULE_V:
                v_existing += 1
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
    to_place = unplaced + missing_total
    v_lb = max(
        0,
        -(-(ii_existing + missing_ii) // (FRAME_MODULE_CAPACITY - 1)) - v_existing,
    )
    new_frames = max(
        0, -(-(to_place + v_lb - free_slots) // FRAME_MODULE_CAPACITY)
    )
    frames_to_rack = unracked + new_frames
    if frames_to_rack < rack_deficit:
        fill = 1  # some existing rack keeps a deficit only a fill can close
    elif (frames_to_rack - rack_deficit) % RACK_FRAME_COUNT[ClassName.RACK_SINGLE]:
        fill = 1  # overflow cannot land exactly on rack-sized blocks
    else:
        fill = 0
    return elements_pending + to_place + frames_to_rack + fill


def ui_steps_floor(state: ConfigurationState) -> int | None:
    """Lower bound on remaining end-user actions; None when no sequence of
    them can ever finish the configuration.

    An assignment completes at most one element and a new rack offers at
    most 40 module slots, so incomplete elements plus the slot shortfall
    bound the distance. Stray parts (an unlinked loose module, a rackless
    frame, a rack short of frames) are untouchable by end-user actions:
    assignments only handle an element's own modules and racks only arrive
    complete.
    """
    idx = state._index
    incomplete = 0
    missing_total = 0
    missing_ii = 0
    unplaced_linked = 0
    ii_existing = 0
    v_existing = 0
    free_slots = 0
    for oid, cls in idx.classes.items():
        if cls in ELEMENT_REQUIREMENTS:
            module_class, required = ELEMENT_REQUIREMENTS[cls]
            linked = idx.modules_of_element.get(oid, [])
            missing = required - len(linked)
            unplaced = sum(1 for m in linked if m not in idx.frame_of_module)
            if missing > 0 or unplaced:
                incomplete += 1
            missing_total += max(0, missing)
            unplaced_linked += unplaced
            if module_class is ClassName.MODULE_II:
                missing_ii += max(0, missing)
        elif cls in MODULE_CLASSES:
            if (
                oid not in idx.frame_of_module
                and oid not in idx.element_of_module
            ):
                return None
            if cls is ClassName.MODULE_II:
                ii_existing += 1
            elif cls is ClassName.MODULE_V:
                v_existing += 1
        elif cls is ClassName.FRAME:
            if oid not in idx.rack_of_frame:
                return None
            free_slots += FRAME_MODULE_CAPACITY - len(
                idx.modules_of_frame.get(oid, [])
            )
        elif cls in RACK_FRAME_COUNT:
            if len(idx.frames_of_rack.get(oid, [])) != RACK_FRAME_COUNT[cls]:
                return None
    v_lb = max(
        0,
        -(-(ii_existing + missing_ii) // (FRAME_MODULE_CAPACITY - 1)) - v_existing,
    )
    shortfall = missing_total + unplaced_linked + v_lb - free_slots
    return incomplete + max(0, -(-shortfall // _MAX_RACK_SLOTS))


GENERIC = Strategy("generic", generic_actions, max_facts_per_action=1)
ORDERED = Strategy(
    "ordered",
    ordered_actions,
    max_facts_per_action=14,
    steps_floor=ordered_steps_floor,
)
ALGORITHMIC = Strategy(
    "algorithmic", _algorithmic_generate, deterministic=True, max_facts_per_action=14
)
UI = Strategy(
    "ui",
    ui_actions,
    max_facts_per_action=17,
    offers_actions_when_valid=True,
    steps_floor=ui_steps_floor,
)

STRATEGIES: dict[str, Strategy] = {
    s.name: s for s in (GENERIC, ORDERED, ALGORITHMIC, UI)
}


def strategy_by_name(name: str) -> Strategy:
    try:
        return STRATEGIES[name]
    except KeyError:
        raise UnknownStrategyError(
            f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}"
        ) from None
