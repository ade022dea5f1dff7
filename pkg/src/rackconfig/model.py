"""Object model for the hardware-racks configuration domain.

A configuration is a set of facts: ``isA`` facts typing objects and
association facts linking them (rack-frame, frame-module, element-module).
The domain rules split into two groups:

* Upper-bound rules (at most N, type compatibility) are *hard constraints*.
  They are enforced by the construction API, so a state that violates one is
  unrepresentable.
* Lower-bound rules (at least N, exactly N on the low side) are *violations*.
  They are allowed to hold temporarily and are what drives incremental
  solving: a state is a valid configuration exactly when it has none.

Domain rules:

* a rackSingle contains exactly 4 frames, a rackDouble exactly 8
* a frame contains up to 5 modules and belongs to exactly 1 rack
* a module belongs to exactly 1 frame and to at most 1 element
* elementA/B/C/D require exactly 1/2/3/4 modules of type I/II/III/IV
* a frame contains a moduleII if and only if it contains exactly one moduleV
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence


class ClassName(Enum):
    """Object classes. The last three are abstract groupings: they classify
    objects but cannot be instantiated."""

    RACK_SINGLE = "rackSingle"
    RACK_DOUBLE = "rackDouble"
    FRAME = "frame"
    MODULE_I = "moduleI"
    MODULE_II = "moduleII"
    MODULE_III = "moduleIII"
    MODULE_IV = "moduleIV"
    MODULE_V = "moduleV"
    ELEMENT_A = "elementA"
    ELEMENT_B = "elementB"
    ELEMENT_C = "elementC"
    ELEMENT_D = "elementD"
    RACK = "rack"
    MODULE = "module"
    ELEMENT = "element"


LEAF_CLASSES: tuple[ClassName, ...] = (
    ClassName.RACK_SINGLE,
    ClassName.RACK_DOUBLE,
    ClassName.FRAME,
    ClassName.MODULE_I,
    ClassName.MODULE_II,
    ClassName.MODULE_III,
    ClassName.MODULE_IV,
    ClassName.MODULE_V,
    ClassName.ELEMENT_A,
    ClassName.ELEMENT_B,
    ClassName.ELEMENT_C,
    ClassName.ELEMENT_D,
)

RACK_CLASSES = frozenset({ClassName.RACK_SINGLE, ClassName.RACK_DOUBLE})
MODULE_CLASSES = frozenset(
    {
        ClassName.MODULE_I,
        ClassName.MODULE_II,
        ClassName.MODULE_III,
        ClassName.MODULE_IV,
        ClassName.MODULE_V,
    }
)
ELEMENT_CLASSES = frozenset(
    {ClassName.ELEMENT_A, ClassName.ELEMENT_B, ClassName.ELEMENT_C, ClassName.ELEMENT_D}
)

#: Exact number of frames each rack class must contain.
RACK_FRAME_COUNT = {ClassName.RACK_SINGLE: 4, ClassName.RACK_DOUBLE: 8}

#: Maximum number of modules a frame can contain.
FRAME_MODULE_CAPACITY = 5

#: Required module class and exact count for each element class.
ELEMENT_REQUIREMENTS = {
    ClassName.ELEMENT_A: (ClassName.MODULE_I, 1),
    ClassName.ELEMENT_B: (ClassName.MODULE_II, 2),
    ClassName.ELEMENT_C: (ClassName.MODULE_III, 3),
    ClassName.ELEMENT_D: (ClassName.MODULE_IV, 4),
}


class AssocKind(Enum):
    """Association fact kinds, in canonical serialization order."""

    RACK_FRAME = "rack_frame"
    FRAME_MODULE = "frame_module"
    ELEMENT_MODULE = "element_module"


@dataclass(frozen=True)
class IsA:
    """Typing fact: object ``object_id`` is an instance of ``class_name``."""

    object_id: int
    class_name: ClassName


@dataclass(frozen=True)
class Link:
    """Association fact. ``id1``/``id2`` follow the kind's name order:
    rack_frame(rack, frame), frame_module(frame, module),
    element_module(element, module)."""

    kind: AssocKind
    id1: int
    id2: int


Fact = IsA | Link

_ASSOC_ORDER = {k: i for i, k in enumerate(AssocKind)}
_CLASS_ORDER = {c: i for i, c in enumerate(ClassName)}


def fact_sort_key(fact: Fact) -> tuple:
    """Canonical fact order: isA facts first (by id), then associations by
    (kind, id1, id2)."""
    if isinstance(fact, IsA):
        return (0, 0, fact.object_id, _CLASS_ORDER[fact.class_name])
    return (1, _ASSOC_ORDER[fact.kind], fact.id1, fact.id2)


class HardConstraint(Enum):
    """Upper-bound rules enforced by construction."""

    RACK_SINGLE_MAX_FRAMES = "rack_single_max_frames"
    RACK_DOUBLE_MAX_FRAMES = "rack_double_max_frames"
    FRAME_MAX_MODULES = "frame_max_modules"
    FRAME_MAX_ONE_RACK = "frame_max_one_rack"
    MODULE_MAX_ONE_FRAME = "module_max_one_frame"
    MODULE_MAX_ONE_ELEMENT = "module_max_one_element"
    ELEMENT_MODULE_TYPE_MATCH = "element_module_type_match"
    ELEMENT_MAX_REQUIRED_MODULES = "element_max_required_modules"
    FRAME_MAX_ONE_MODULE_V = "frame_max_one_module_v"


class ViolationKind(Enum):
    """Lower-bound rules; their presence makes a state incomplete, not
    unrepresentable."""

    RACK_NEEDS_MORE_FRAMES = "rack_needs_more_frames"
    FRAME_NEEDS_RACK = "frame_needs_rack"
    MODULE_NEEDS_FRAME = "module_needs_frame"
    ELEMENT_NEEDS_MODULES = "element_needs_modules"
    MODULE_II_WITHOUT_MODULE_V = "module_ii_without_module_v"
    MODULE_V_WITHOUT_MODULE_II = "module_v_without_module_ii"


@dataclass(frozen=True)
class Violation:
    """One unmet lower-bound rule.

    ``subject`` is the object the rule centers on (the rack, frame, module or
    element). ``missing`` is only meaningful for ELEMENT_NEEDS_MODULES (how
    many required modules are still unlinked). ``step`` records when the
    violation was observed; it is bookkeeping and excluded from equality so
    that the same violation can be tracked across steps.
    """

    kind: ViolationKind
    subject: int
    missing: int = 0
    step: int = field(default=0, compare=False)


class ConfigurationError(Exception):
    """Base class for all domain errors."""


class AbstractClassError(ConfigurationError):
    """Instantiation of an abstract grouping (rack, module, element)."""


class UnknownObjectError(ConfigurationError):
    """An association referenced an id with no isA fact."""


class TypeMismatchError(ConfigurationError):
    """Association endpoints are class-incompatible (including an element
    linked to a module of the wrong type)."""


class UpperBoundViolationError(ConfigurationError):
    """The edit would exceed a hard constraint."""

    def __init__(self, constraint: HardConstraint, message: str):
        super().__init__(message)
        self.constraint = constraint


class MalformedConfigurationError(ConfigurationError):
    """Unparseable or semantically inconsistent configuration text."""


class _Index:
    """Derived lookup tables over a fact set, built in one pass."""

    __slots__ = (
        "classes",
        "frames_of_rack",
        "rack_of_frame",
        "modules_of_frame",
        "frame_of_module",
        "modules_of_element",
        "element_of_module",
    )

    def __init__(self, facts: Iterable[Fact]):
        self.classes: dict[int, ClassName] = {}
        self.frames_of_rack: dict[int, list[int]] = {}
        self.rack_of_frame: dict[int, int] = {}
        self.modules_of_frame: dict[int, list[int]] = {}
        self.frame_of_module: dict[int, int] = {}
        self.modules_of_element: dict[int, list[int]] = {}
        self.element_of_module: dict[int, int] = {}
        links: list[Link] = []
        for fact in facts:
            if isinstance(fact, IsA):
                self.classes[fact.object_id] = fact.class_name
            else:
                links.append(fact)
        for link in links:
            if link.kind is AssocKind.RACK_FRAME:
                self.frames_of_rack.setdefault(link.id1, []).append(link.id2)
                self.rack_of_frame[link.id2] = link.id1
            elif link.kind is AssocKind.FRAME_MODULE:
                self.modules_of_frame.setdefault(link.id1, []).append(link.id2)
                self.frame_of_module[link.id2] = link.id1
            else:
                self.modules_of_element.setdefault(link.id1, []).append(link.id2)
                self.element_of_module[link.id2] = link.id1


@dataclass(frozen=True)
class ConfigurationState:
    """Immutable snapshot of a partial configuration.

    ``facts`` is the complete fact set, ``step`` the number of engine steps
    taken to reach it, ``next_id`` the id the next created object will get.
    All mutation goes through :meth:`create_object` and :meth:`associate`,
    which refuse edits that would violate a hard constraint; states with a
    hard-constraint violation therefore cannot be constructed.
    """

    facts: frozenset[Fact] = frozenset()
    step: int = 0
    next_id: int = 1

    @classmethod
    def empty(cls) -> "ConfigurationState":
        return cls()

    @classmethod
    def from_facts(cls, facts: Iterable[Fact], step: int = 0) -> "ConfigurationState":
        """Build a state from raw facts, validating everything the
        incremental API would have enforced. Raises on duplicate typing,
        dangling or incompatible associations, abstract classes, duplicate
        association facts, and hard-constraint violations."""
        fact_list = list(facts)
        seen_ids: dict[int, ClassName] = {}
        for fact in fact_list:
            if isinstance(fact, IsA):
                if fact.object_id < 1:
                    raise MalformedConfigurationError(
                        f"object id must be positive: {fact.object_id}"
                    )
                if fact.class_name not in LEAF_CLASSES:
                    raise AbstractClassError(
                        f"cannot instantiate abstract class {fact.class_name.value}"
                    )
                if fact.object_id in seen_ids:
                    raise MalformedConfigurationError(
                        f"object {fact.object_id} typed more than once"
                    )
                seen_ids[fact.object_id] = fact.class_name
        link_facts = [f for f in fact_list if isinstance(f, Link)]
        if len(set(link_facts)) != len(link_facts):
            raise MalformedConfigurationError("duplicate association fact")
        state = cls(
            facts=frozenset(f for f in fact_list if isinstance(f, IsA)),
            step=step,
            next_id=max(seen_ids, default=0) + 1,
        )
        for link in link_facts:
            state = state.associate(link.kind, link.id1, link.id2)
        return state.with_step(step)

    @functools.cached_property
    def _index(self) -> _Index:
        return _Index(self.facts)

    # -- queries ---------------------------------------------------------

    def class_of(self, object_id: int) -> ClassName | None:
        return self._index.classes.get(object_id)

    def objects_of(self, classes: Iterable[ClassName]) -> list[int]:
        """Ids of all objects whose class is in ``classes``, ascending."""
        wanted = frozenset(classes)
        return sorted(
            oid for oid, cls in self._index.classes.items() if cls in wanted
        )

    @property
    def object_count(self) -> int:
        return len(self._index.classes)

    def frames_of_rack(self, rack: int) -> list[int]:
        return sorted(self._index.frames_of_rack.get(rack, []))

    def rack_of_frame(self, frame: int) -> int | None:
        return self._index.rack_of_frame.get(frame)

    def modules_of_frame(self, frame: int) -> list[int]:
        return sorted(self._index.modules_of_frame.get(frame, []))

    def frame_of_module(self, module: int) -> int | None:
        return self._index.frame_of_module.get(module)

    def modules_of_element(self, element: int) -> list[int]:
        return sorted(self._index.modules_of_element.get(element, []))

    def element_of_module(self, module: int) -> int | None:
        return self._index.element_of_module.get(module)

    def frame_free_slots(self, frame: int) -> int:
        return FRAME_MODULE_CAPACITY - len(self._index.modules_of_frame.get(frame, []))

    def frame_has_module_of(self, frame: int, class_name: ClassName) -> bool:
        classes = self._index.classes
        return any(
            classes[m] is class_name
            for m in self._index.modules_of_frame.get(frame, [])
        )

    def sorted_facts(self) -> list[Fact]:
        return sorted(self.facts, key=fact_sort_key)

    # -- construction ----------------------------------------------------

    def create_object(self, class_name: ClassName) -> tuple["ConfigurationState", int]:
        """Create one object of a leaf class; returns the new state and the
        fresh id. The step counter is untouched (stepping is the engine's
        job)."""
        if class_name not in LEAF_CLASSES:
            raise AbstractClassError(
                f"cannot instantiate abstract class {class_name.value}"
            )
        oid = self.next_id
        new = replace(
            self,
            facts=self.facts | {IsA(oid, class_name)},
            next_id=oid + 1,
        )
        return new, oid

    def associate(self, kind: AssocKind, id1: int, id2: int) -> "ConfigurationState":
        """Add an association fact, refusing any edit that would violate a
        hard constraint."""
        error = self._associate_error(kind, id1, id2)
        if error is not None:
            raise error
        return replace(self, facts=self.facts | {Link(kind, id1, id2)})

    def can_associate(self, kind: AssocKind, id1: int, id2: int) -> bool:
        return self._associate_error(kind, id1, id2) is None

    def _associate_error(
        self, kind: AssocKind, id1: int, id2: int
    ) -> ConfigurationError | None:
        idx = self._index
        cls1 = idx.classes.get(id1)
        cls2 = idx.classes.get(id2)
        if cls1 is None:
            return UnknownObjectError(f"unknown object {id1}")
        if cls2 is None:
            return UnknownObjectError(f"unknown object {id2}")
        if kind is AssocKind.RACK_FRAME:
            if cls1 not in RACK_CLASSES or cls2 is not ClassName.FRAME:
                return TypeMismatchError(
                    f"rack_frame needs (rack, frame), got "
                    f"({cls1.value}, {cls2.value})"
                )
            if id2 in idx.rack_of_frame:
                return UpperBoundViolationError(
                    HardConstraint.FRAME_MAX_ONE_RACK,
                    f"frame {id2} already belongs to a rack",
                )
            limit = RACK_FRAME_COUNT[cls1]
            if len(idx.frames_of_rack.get(id1, [])) >= limit:
                constraint = (
                    HardConstraint.RACK_SINGLE_MAX_FRAMES
                    if cls1 is ClassName.RACK_SINGLE
                    else HardConstraint.RACK_DOUBLE_MAX_FRAMES
                )
                return UpperBoundViolationError(
                    constraint, f"rack {id1} already has {limit} frames"
                )
        elif kind is AssocKind.FRAME_MODULE:
            if cls1 is not ClassName.FRAME or cls2 not in MODULE_CLASSES:
                return TypeMismatchError(
                    f"frame_module needs (frame, module), got "
                    f"({cls1.value}, {cls2.value})"
                )
            if id2 in idx.frame_of_module:
                return UpperBoundViolationError(
                    HardConstraint.MODULE_MAX_ONE_FRAME,
                    f"module {id2} already belongs to a frame",
                )
            members = idx.modules_of_frame.get(id1, [])
            if len(members) >= FRAME_MODULE_CAPACITY:
                return UpperBoundViolationError(
                    HardConstraint.FRAME_MAX_MODULES,
                    f"frame {id1} already holds {FRAME_MODULE_CAPACITY} modules",
                )
            if cls2 is ClassName.MODULE_V and any(
                idx.classes[m] is ClassName.MODULE_V for m in members
            ):
                return UpperBoundViolationError(
                    HardConstraint.FRAME_MAX_ONE_MODULE_V,
                    f"frame {id1} already holds a moduleV",
                )
        else:
            if cls1 not in ELEMENT_CLASSES or cls2 not in MODULE_CLASSES:
                return TypeMismatchError(
                    f"element_module needs (element, module), got "
                    f"({cls1.value}, {cls2.value})"
                )
            required_class, required_count = ELEMENT_REQUIREMENTS[cls1]
            if cls2 is not required_class:
                return TypeMismatchError(
                    f"{cls1.value} requires {required_class.value}, "
                    f"got {cls2.value}"
                )
            if id2 in idx.element_of_module:
                return UpperBoundViolationError(
                    HardConstraint.MODULE_MAX_ONE_ELEMENT,
                    f"module {id2} already belongs to an element",
                )
            if len(idx.modules_of_element.get(id1, [])) >= required_count:
                return UpperBoundViolationError(
                    HardConstraint.ELEMENT_MAX_REQUIRED_MODULES,
                    f"element {id1} already has its {required_count} modules",
                )
        return None

    def with_step(self, step: int) -> "ConfigurationState":
        return replace(self, step=step)

    def advance_step(self) -> "ConfigurationState":
        return replace(self, step=self.step + 1)


def hard_violations(facts: Iterable[Fact]) -> list[tuple[HardConstraint, tuple[int, ...]]]:
    """Evaluate every hard constraint on a raw fact set.

    Returns (constraint, subject ids) pairs; empty means the set is
    hard-constraint-clean. States built through the public API always come
    back empty; this exists for auditing raw fact sets and for fuzz tests.
    """
    idx = _Index(facts)
    found: list[tuple[HardConstraint, tuple[int, ...]]] = []
    for rack, frames in sorted(idx.frames_of_rack.items()):
        cls = idx.classes.get(rack)
        if cls in RACK_FRAME_COUNT and len(frames) > RACK_FRAME_COUNT[cls]:
            constraint = (
                HardConstraint.RACK_SINGLE_MAX_FRAMES
                if cls is ClassName.RACK_SINGLE
                else HardConstraint.RACK_DOUBLE_MAX_FRAMES
            )
            found.append((constraint, (rack,)))
    frame_owner: dict[int, list[int]] = {}
    for fact in facts:
        if isinstance(fact, Link) and fact.kind is AssocKind.RACK_FRAME:
            frame_owner.setdefault(fact.id2, []).append(fact.id1)
    for frame, owners in sorted(frame_owner.items()):
        if len(owners) > 1:
            found.append((HardConstraint.FRAME_MAX_ONE_RACK, (frame,)))
    for frame, modules in sorted(idx.modules_of_frame.items()):
        if len(modules) > FRAME_MODULE_CAPACITY:
            found.append((HardConstraint.FRAME_MAX_MODULES, (frame,)))
        v_count = sum(
            1 for m in modules if idx.classes.get(m) is ClassName.MODULE_V
        )
        if v_count > 1:
            found.append((HardConstraint.FRAME_MAX_ONE_MODULE_V, (frame,)))
    module_frame: dict[int, list[int]] = {}
    module_element: dict[int, list[int]] = {}
    for fact in facts:
        if isinstance(fact, Link) and fact.kind is AssocKind.FRAME_MODULE:
            module_frame.setdefault(fact.id2, []).append(fact.id1)
        if isinstance(fact, Link) and fact.kind is AssocKind.ELEMENT_MODULE:
            module_element.setdefault(fact.id2, []).append(fact.id1)
    for module, frames in sorted(module_frame.items()):
        if len(frames) > 1:
            found.append((HardConstraint.MODULE_MAX_ONE_FRAME, (module,)))
    for module, elements in sorted(module_element.items()):
        if len(elements) > 1:
            found.append((HardConstraint.MODULE_MAX_ONE_ELEMENT, (module,)))
    for element, modules in sorted(idx.modules_of_element.items()):
        cls = idx.classes.get(element)
        if cls not in ELEMENT_REQUIREMENTS:
            continue
        required_class, required_count = ELEMENT_REQUIREMENTS[cls]
        for m in modules:
            if idx.classes.get(m) is not required_class:
                found.append(
                    (HardConstraint.ELEMENT_MODULE_TYPE_MATCH, (element, m))
                )
        if len(modules) > required_count:
            found.append(
                (HardConstraint.ELEMENT_MAX_REQUIRED_MODULES, (element,))
            )
    return found


def detect_violations(
    state: ConfigurationState, *, flag_v_without_ii: bool = True
) -> frozenset[Violation]:
    """Compute every unmet lower-bound rule of the current facts.

    Pure function of the fact set; the state's step is stamped onto each
    violation for bookkeeping. ``flag_v_without_ii`` controls the reverse
    direction of the moduleII/moduleV rule (a stray moduleV in a frame with
    no moduleII); it is part of the rule's "if and only if" reading and on
    by default.
    """
    idx = state._index
    step = state.step
    out: set[Violation] = set()
    for oid, cls in idx.classes.items():
        if cls in RACK_FRAME_COUNT:
            if len(idx.frames_of_rack.get(oid, [])) < RACK_FRAME_COUNT[cls]:
                out.add(Violation(ViolationKind.RACK_NEEDS_MORE_FRAMES, oid, step=step))
        elif cls is ClassName.FRAME:
            if oid not in idx.rack_of_frame:
                out.add(Violation(ViolationKind.FRAME_NEEDS_RACK, oid, step=step))
            members = idx.modules_of_frame.get(oid, [])
            has_ii = any(idx.classes[m] is ClassName.MODULE_II for m in members)
            has_v = any(idx.classes[m] is ClassName.MODULE_V for m in members)
            if has_ii and not has_v:
                out.add(
                    Violation(ViolationKind.MODULE_II_WITHOUT_MODULE_V, oid, step=step)
                )
            if flag_v_without_ii and has_v and not has_ii:
                out.add(
                    Violation(ViolationKind.MODULE_V_WITHOUT_MODULE_II, oid, step=step)
                )
        elif cls in MODULE_CLASSES:
            if oid not in idx.frame_of_module:
                out.add(Violation(ViolationKind.MODULE_NEEDS_FRAME, oid, step=step))
        elif cls in ELEMENT_REQUIREMENTS:
            _, required = ELEMENT_REQUIREMENTS[cls]
            missing = required - len(idx.modules_of_element.get(oid, []))
            if missing > 0:
                out.add(
                    Violation(
                        ViolationKind.ELEMENT_NEEDS_MODULES, oid, missing, step=step
                    )
                )
    return frozenset(out)


def is_valid(state: ConfigurationState) -> bool:
    """True when the state is a complete, valid configuration."""
    return not detect_violations(state)


def element_configuration(counts: Sequence[int]) -> ConfigurationState:
    """Initial state holding bare elements: ``counts`` gives how many
    elementA/B/C/D to create, ids assigned in class blocks (all A's first,
    then B's, and so on), ascending from 1."""
    if len(counts) != 4:
        raise ValueError("counts must be (elementA, elementB, elementC, elementD)")
    state = ConfigurationState.empty()
    for cls, count in zip(
        (ClassName.ELEMENT_A, ClassName.ELEMENT_B, ClassName.ELEMENT_C, ClassName.ELEMENT_D),
        counts,
    ):
        for _ in range(count):
            state, _oid = state.create_object(cls)
    return state
