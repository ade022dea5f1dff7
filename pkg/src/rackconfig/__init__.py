"""Incremental configuration engine for hardware racks.

Facts describe objects and their associations; upper-bound rules are
enforced by construction, lower-bound rules surface as violations, and
strategies repair violations one action per step until the configuration
is valid.
"""

from __future__ import annotations

from .actions import Action, ActionKind, InapplicableActionError, apply_action
from .engine import (
    InvalidInitialStateError,
    SolveOptions,
    SolveResult,
    SolveTimeoutError,
    SolveTrace,
    advance,
    replay,
    solve,
    step,
)
from .model import (
    AssocKind,
    ClassName,
    ConfigurationError,
    ConfigurationState,
    Fact,
    HardConstraint,
    IsA,
    Link,
    UpperBoundViolationError,
    Violation,
    ViolationKind,
    detect_violations,
    element_configuration,
    is_valid,
)
from .strategies import (
    ALGORITHMIC,
    GENERIC,
    ORDERED,
    STRATEGIES,
    UI,
    Strategy,
    UnknownStrategyError,
    strategy_by_name,
)
from .textio import (
    format_configuration,
    format_trace_lines,
    parse_configuration,
    parse_trace,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ActionKind",
    "ALGORITHMIC",
    "AssocKind",
    "ClassName",
    "ConfigurationError",
    "ConfigurationState",
    "Fact",
    "GENERIC",
    "HardConstraint",
    "InapplicableActionError",
    "InvalidInitialStateError",
    "IsA",
    "Link",
    "ORDERED",
    "STRATEGIES",
    "SolveOptions",
    "SolveResult",
    "SolveTimeoutError",
    "SolveTrace",
    "Strategy",
    "UI",
    "UnknownStrategyError",
    "UpperBoundViolationError",
    "Violation",
    "ViolationKind",
    "advance",
    "apply_action",
    "detect_violations",
    "element_configuration",
    "format_configuration",
    "format_trace_lines",
    "is_valid",
    "parse_configuration",
    "parse_trace",
    "replay",
    "solve",
    "step",
    "strategy_by_name",
    "__version__",
]
