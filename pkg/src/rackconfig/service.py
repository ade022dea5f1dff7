"""HTTP session service for interactive configuration editing.

One session holds a configuration plus its full edit history. Clients read
a snapshot (facts, violations, offered actions), apply an offered action by
index, undo, or ask the engine to autocomplete the rest. Action indexes are
only meaningful against the step counter they were read at, so application
is compare-and-set: a stale step is rejected with 409 and the client
re-reads the snapshot.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from secrets import token_hex

from fastapi import FastAPI
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .actions import Action, apply_action
from .engine import SolveOptions, SolveResult, SolveTimeoutError, solve
from .model import ConfigurationError, ConfigurationState, detect_violations
from .strategies import Strategy, UnknownStrategyError, strategy_by_name
from .textio import fact_to_text, format_configuration, parse_configuration

AUTOCOMPLETE_TIMEOUT_S = 60.0


@dataclass
class Session:
    """An edit history; ``history[0]`` is the initial state and never pops."""

    id: str
    strategy: Strategy
    history: list[ConfigurationState]
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def current(self) -> ConfigurationState:
        return self.history[-1]


class SessionStore:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}

    def create(self, strategy: Strategy, initial: ConfigurationState) -> Session:
        with self._lock:
            session_id = token_hex(8)
            while session_id in self._sessions:
                session_id = token_hex(8)
            session = Session(session_id, strategy, [initial])
            self._sessions[session_id] = session
            return session

    def get(self, session_id: str) -> Session | None:
        with self._lock:
            return self._sessions.get(session_id)


class CreateSessionRequest(BaseModel):
    strategy: str = "ui"
    configuration: str | None = None


class ApplyActionRequest(BaseModel):
    step: int


def _fact_steps(history: list[ConfigurationState]) -> dict:
    """Map each fact to the step of the first state that contains it."""
    steps: dict = {}
    previous: frozenset = frozenset()
    for state in history:
        for fact in state.facts - previous:
            steps[fact] = state.step
        previous = state.facts
    return steps


def available_actions(state: ConfigurationState, strategy: Strategy) -> list[Action]:
    """The actions a session offers: repairs while violations remain, and
    for strategies marked as interactive also moves on valid states."""
    violations = detect_violations(state)
    if violations or strategy.offers_actions_when_valid:
        return strategy.generate(state, violations)
    return []


def session_snapshot(session: Session) -> dict:
    state = session.current
    fact_steps = _fact_steps(session.history)
    violations = sorted(
        detect_violations(state), key=lambda v: (v.kind.value, v.subject)
    )
    actions = available_actions(state, session.strategy)
    return {
        "session_id": session.id,
        "strategy": session.strategy.name,
        "step": state.step,
        "valid": not violations,
        "facts": [
            {"fact": fact_to_text(fact), "step": fact_steps[fact]}
            for fact in state.sorted_facts()
        ],
        "violations": [
            {"kind": v.kind.value, "subject": v.subject, "missing": v.missing}
            for v in violations
        ],
        "actions": [
            {"index": i, "label": action.term(), "effects": action.effect_terms()}
            for i, action in enumerate(actions)
        ],
    }


def _error(status: int, code: str, detail: str = "") -> JSONResponse:
    body: dict = {"error": code}
    if detail:
        body["detail"] = detail
    return JSONResponse(body, status_code=status)


def create_app(static_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="rackconfig", version="0.1.0")
    store = SessionStore()

    @app.post("/sessions", status_code=201)
    def create_session(payload: CreateSessionRequest | None = None):
        payload = payload or CreateSessionRequest()
        try:
            strategy = strategy_by_name(payload.strategy)
        except UnknownStrategyError as exc:
            return _error(400, "unknown_strategy", str(exc))
        if payload.configuration is None:
            initial = ConfigurationState.empty()
        else:
            try:
                initial = parse_configuration(payload.configuration)
            except ConfigurationError as exc:
                return _error(400, "malformed_configuration", str(exc))
        session = store.create(strategy, initial)
        return session_snapshot(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session")
        with session.lock:
            return session_snapshot(session)

    @app.post("/sessions/{session_id}/actions/{index}")
    def apply_session_action(session_id: str, index: int, payload: ApplyActionRequest):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session")
        with session.lock:
            state = session.current
            if payload.step != state.step:
                return JSONResponse(
                    {
                        "error": "stale_action_index",
                        "expected": state.step,
                        "got": payload.step,
                    },
                    status_code=409,
                )
            actions = available_actions(state, session.strategy)
            if not 0 <= index < len(actions):
                return _error(
                    400,
                    "index_out_of_range",
                    f"index {index} not in 0..{len(actions) - 1}",
                )
            session.history.append(apply_action(state, actions[index]))
            return session_snapshot(session)

    @app.post("/sessions/{session_id}/undo")
    def undo(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session")
        with session.lock:
            if len(session.history) == 1:
                return _error(409, "nothing_to_undo")
            session.history.pop()
            return session_snapshot(session)

    @app.post("/sessions/{session_id}/autocomplete")
    def autocomplete(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session")
        with session.lock:
            opts = SolveOptions(deadline=time.monotonic() + AUTOCOMPLETE_TIMEOUT_S)
            try:
                trace = solve(session.current, session.strategy, opts)
            except SolveTimeoutError:
                snapshot = session_snapshot(session)
                snapshot.update(
                    {"autocompleted": False, "result": "timeout", "steps_added": 0}
                )
                return snapshot
            solved = trace.result is SolveResult.SOLVED
            if solved:
                session.history.extend(ts.state for ts in trace.steps)
            snapshot = session_snapshot(session)
            snapshot.update(
                {
                    "autocompleted": solved,
                    "result": trace.result.value,
                    "steps_added": len(trace) if solved else 0,
                }
            )
            return snapshot

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session")
        with session.lock:
            return PlainTextResponse(format_configuration(session.current))

    if static_dir is not None and static_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


app = create_app()
