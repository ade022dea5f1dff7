"""Actions: the engine's unit of change.

An action pairs a structured label (kind + arguments, renderable as a term
like ``create_modules_for_element(3)``) with its concrete effects: the exact
facts it adds, including isA facts whose ids were pre-assigned against the
state the action was generated for. Applying an action replays its effects
through the guarded construction API, so an applicable action can never
produce a hard-constraint violation; an action generated for a different
state fails with InapplicableActionError instead of corrupting anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .model import (
    AssocKind,
    ClassName,
    ConfigurationError,
    ConfigurationState,
    Fact,
    IsA,
    Link,
    fact_sort_key,
)


class ActionKind(Enum):
    """Action constructors in canonical order; the order is the primary
    sort key when strategies rank their candidate actions."""

    CREATE_OBJECT = "create_object"
    ASSOCIATE = "associate"
    CREATE_MODULES_FOR_ELEMENT = "create_modules_for_element"
    CREATE_FRAME_FOR_MODULE = "create_frame_for_module"
    CREATE_RACK_FOR_FRAME = "create_rack_for_frame"
    CREATE_FRAMES_FOR_RACK = "create_frames_for_rack"
    CREATE_ELEMENT = "create_element"
    CREATE_RACK = "create_rack"
    ASSIGN_ELEMENT_TO_RACK = "assign_element_to_rack"


#: Argument marker meaning "a new object", used by actions that can target
#: either an existing object or a fresh one.
NEW = "new"


@dataclass(frozen=True)
class Action:
    """One applicable step: a label plus the facts it adds.

    ``args`` renders into the action term; ``effects`` holds every fact the
    action adds, in application order (creations interleaved with the links
    that use them is fine; application orders creations by id first).
    """

    kind: ActionKind
    args: tuple
    effects: tuple[Fact, ...]

    def term(self) -> str:
        """Textual form, e.g. ``create_rack_for_frame(4,new(rackSingle))``."""
        rendered = []
        for arg in self.args:
            if isinstance(arg, ClassName):
                rendered.append(arg.value)
            elif isinstance(arg, AssocKind):
                rendered.append(arg.value)
            elif isinstance(arg, tuple) and arg and arg[0] == NEW:
                inner = arg[1].value if isinstance(arg[1], ClassName) else str(arg[1])
                rendered.append(f"new({inner})")
            elif arg == NEW:
                rendered.append(NEW)
            else:
                rendered.append(str(arg))
        return f"{self.kind.value}({','.join(rendered)})"

    def effect_terms(self) -> list[str]:
        from .textio import fact_to_text  # local import avoids a cycle

        return [fact_to_text(f) for f in sorted(self.effects, key=fact_sort_key)]


class InapplicableActionError(ConfigurationError):
    """The action does not fit the state it was applied to."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


def apply_action(state: ConfigurationState, action: Action) -> ConfigurationState:
    """Apply one action and advance the step counter by exactly one.

    New objects in the effects must carry the ids the state would assign
    (next_id, next_id+1, ...); links are added through the guarded API.
    Any mismatch or guard refusal raises InapplicableActionError.
    """
    if not action.effects:
        raise InapplicableActionError(f"action {action.term()} adds no facts")
    creations = sorted(
        (f for f in action.effects if isinstance(f, IsA)), key=lambda f: f.object_id
    )
    links = [f for f in action.effects if isinstance(f, Link)]
    current = state
    expected = state.next_id
    try:
        for isa in creations:
            if isa.object_id != expected:
                raise InapplicableActionError(
                    f"action {action.term()} expects fresh id {isa.object_id}, "
                    f"state would assign {expected}"
                )
            current, _ = current.create_object(isa.class_name)
            expected += 1
        for link in links:
            if link in current.facts:
                raise InapplicableActionError(
                    f"action {action.term()} re-adds fact"
                )
            current = current.associate(link.kind, link.id1, link.id2)
    except InapplicableActionError:
        raise
    except ConfigurationError as exc:
        raise InapplicableActionError(
            f"action {action.term()} is not applicable: {exc}"
        ) from exc
    return current.advance_step()
