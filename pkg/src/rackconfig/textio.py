"""Text formats: configuration files and step traces.

Configuration files are line-oriented facts, one per line, each terminated
by a period::

    isA(1,elementA).
    isA(2,rackSingle).
    rack_frame(2,3).

Class names are the serialized enum values (``rackSingle``, ``moduleI``, ...).
Printing is canonical: isA facts first ascending by id, then associations by
(kind, id1, id2). Parsing accepts facts in any order, blank lines, and ``%``
comments, and round-trips: printing a parsed file reproduces its canonical
form byte for byte.

Traces record a solve run::

    step(0).
    isA(1,elementA).
    step(1).
    action(1, create_modules_for_element(1)).
    isA(2,moduleI).
    element_module(1,2).

The step(0) block holds the initial configuration; each later block holds
the action taken and the facts it added. A parsed trace replays to the same
final configuration.
"""

from __future__ import annotations

import re

from .actions import NEW, Action, ActionKind
from .model import (
    AssocKind,
    ClassName,
    ConfigurationState,
    Fact,
    IsA,
    Link,
    MalformedConfigurationError,
    fact_sort_key,
)

_CLASS_BY_VALUE = {c.value: c for c in ClassName}
_ASSOC_BY_VALUE = {k.value: k for k in AssocKind}
_ACTION_BY_VALUE = {k.value: k for k in ActionKind}

_FACT_RE = re.compile(r"^(\w+)\((\d+),(\w+)\)$")
_STEP_RE = re.compile(r"^step\((\d+)\)$")
_ACTION_RE = re.compile(r"^action\((\d+),\s*(\w+)\((.*)\)\)$")
_NEW_ARG_RE = re.compile(r"^new\((\w+)\)$")


def fact_to_text(fact: Fact) -> str:
    if isinstance(fact, IsA):
        return f"isA({fact.object_id},{fact.class_name.value})"
    return f"{fact.kind.value}({fact.id1},{fact.id2})"


def parse_fact(text: str, line_no: int = 0) -> Fact:
    match = _FACT_RE.match(text)
    if match is None:
        raise MalformedConfigurationError(f"line {line_no}: unparseable fact {text!r}")
    name, first, second = match.groups()
    if name == "isA":
        class_name = _CLASS_BY_VALUE.get(second)
        if class_name is None:
            raise MalformedConfigurationError(
                f"line {line_no}: unknown class {second!r}"
            )
        return IsA(int(first), class_name)
    kind = _ASSOC_BY_VALUE.get(name)
    if kind is None:
        raise MalformedConfigurationError(f"line {line_no}: unknown fact kind {name!r}")
    if not second.isdigit():
        raise MalformedConfigurationError(
            f"line {line_no}: association needs two ids, got {text!r}"
        )
    return Link(kind, int(first), int(second))


def _content_lines(text: str) -> list[tuple[int, str]]:
    """(line number, stripped statement) pairs, comments and blanks removed."""
    out = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        if not line.endswith("."):
            raise MalformedConfigurationError(
                f"line {line_no}: statement must end with '.': {raw!r}"
            )
        out.append((line_no, line[:-1].strip()))
    return out


def format_configuration(state: ConfigurationState) -> str:
    """Canonical text of a configuration; empty state prints as empty text."""
    lines = [fact_to_text(f) + "." for f in state.sorted_facts()]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_configuration(text: str) -> ConfigurationState:
    """Parse a configuration file into a validated step-0 state."""
    facts = [parse_fact(stmt, line_no) for line_no, stmt in _content_lines(text)]
    return ConfigurationState.from_facts(facts)


def _format_args(action: Action) -> str:
    return action.term()


def format_trace_lines(
    initial: ConfigurationState, steps: list[tuple[int, Action]]
) -> str:
    """Trace text from the initial state and (step index, action) pairs."""
    lines: list[str] = [f"step({initial.step})."]
    lines += [fact_to_text(f) + "." for f in initial.sorted_facts()]
    for index, action in steps:
        lines.append(f"step({index}).")
        lines.append(f"action({index}, {action.term()}).")
        lines += [f + "." for f in action.effect_terms()]
    return "\n".join(lines) + "\n"


def _parse_action_args(kind: ActionKind, text: str) -> tuple:
    args: list = []
    if text.strip():
        for raw in text.split(","):
            token = raw.strip()
            new_match = _NEW_ARG_RE.match(token)
            if new_match:
                inner = new_match.group(1)
                if inner in _CLASS_BY_VALUE:
                    args.append((NEW, _CLASS_BY_VALUE[inner]))
                else:
                    raise MalformedConfigurationError(
                        f"unknown class in action target {token!r}"
                    )
            elif token == NEW:
                args.append(NEW)
            elif token.isdigit():
                args.append(int(token))
            elif token in _ASSOC_BY_VALUE:
                args.append(_ASSOC_BY_VALUE[token])
            elif token in _CLASS_BY_VALUE:
                args.append(_CLASS_BY_VALUE[token])
            else:
                raise MalformedConfigurationError(
                    f"unparseable action argument {token!r}"
                )
    return tuple(args)


def parse_trace(text: str) -> tuple[ConfigurationState, list[Action]]:
    """Parse a trace file into its initial state and action list.

    Effects are reconstructed from the fact lines under each action, so a
    parsed trace replays exactly.
    """
    statements = _content_lines(text)
    if not statements or _STEP_RE.match(statements[0][1]) is None:
        raise MalformedConfigurationError("trace must start with a step(N). line")
    initial_facts: list[Fact] = []
    actions: list[Action] = []
    pending: tuple[ActionKind, tuple] | None = None
    pending_effects: list[Fact] = []
    step_lines = 0

    def flush() -> None:
        nonlocal pending, pending_effects
        if pending is not None:
            kind, args = pending
            actions.append(Action(kind, args, tuple(pending_effects)))
        pending = None
        pending_effects = []

    for line_no, stmt in statements:
        if _STEP_RE.match(stmt):
            flush()
            step_lines += 1
            continue
        in_initial = step_lines <= 1 and not actions
        action_match = _ACTION_RE.match(stmt)
        if action_match:
            flush()
            in_initial = False
            _, name, arg_text = action_match.groups()
            kind = _ACTION_BY_VALUE.get(name)
            if kind is None:
                raise MalformedConfigurationError(
                    f"line {line_no}: unknown action {name!r}"
                )
            pending = (kind, _parse_action_args(kind, arg_text))
            continue
        fact = parse_fact(stmt, line_no)
        if pending is not None:
            pending_effects.append(fact)
        elif in_initial:
            initial_facts.append(fact)
        else:
            raise MalformedConfigurationError(
                f"line {line_no}: fact outside initial block or action block"
            )
    flush()
    initial = ConfigurationState.from_facts(initial_facts)
    return initial, actions
