"""HTTP session service: snapshots, compare-and-set action application,
undo, autocomplete, export."""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from rackconfig.model import is_valid
from rackconfig.service import create_app
from rackconfig.textio import parse_configuration

ELEMENT_A_TEXT = "isA(1,elementA).\n"


@pytest.fixture()
def client():
    with TestClient(create_app()) as c:
        yield c


def create_session(client, **payload):
    response = client.post("/sessions", json=payload) if payload else client.post("/sessions")
    assert response.status_code == 201, response.text
    return response.json()


def test_create_default_session(client):
    snapshot = create_session(client)
    assert snapshot["strategy"] == "ui"
    assert snapshot["step"] == 0
    assert snapshot["valid"] is True
    assert snapshot["facts"] == []
    assert snapshot["violations"] == []
    # an empty interactive session offers the six create actions
    labels = [a["label"] for a in snapshot["actions"]]
    assert len(labels) == 6
    assert all(label.startswith("create_") for label in labels)
    assert [a["index"] for a in snapshot["actions"]] == list(range(6))


def test_create_session_with_configuration(client):
    snapshot = create_session(client, strategy="ordered", configuration=ELEMENT_A_TEXT)
    assert snapshot["strategy"] == "ordered"
    assert snapshot["valid"] is False
    assert [f["fact"] for f in snapshot["facts"]] == ["isA(1,elementA)"]
    assert snapshot["violations"] == [
        {"kind": "element_needs_modules", "subject": 1, "missing": 1}
    ]
    assert len(snapshot["actions"]) == 1


def test_create_session_rejects_unknown_strategy(client):
    response = client.post("/sessions", json={"strategy": "nonsense"})
    assert response.status_code == 400
    assert response.json()["error"] == "unknown_strategy"


def test_create_session_rejects_malformed_configuration(client):
    response = client.post("/sessions", json={"configuration": "isA(1,elementA)"})
    assert response.status_code == 400
    assert response.json()["error"] == "malformed_configuration"


def test_unknown_session_is_404_everywhere(client):
    assert client.get("/sessions/missing").status_code == 404
    assert (
        client.post("/sessions/missing/actions/0", json={"step": 0}).status_code == 404
    )
    assert client.post("/sessions/missing/undo").status_code == 404
    assert client.post("/sessions/missing/autocomplete").status_code == 404
    assert client.get("/sessions/missing/export").status_code == 404
    assert client.get("/sessions/missing").json()["error"] == "unknown_session"


def test_apply_action_advances_step(client):
    snapshot = create_session(client)
    sid = snapshot["session_id"]
    response = client.post(f"{'/sessions'}/{sid}/actions/0", json={"step": 0})
    assert response.status_code == 200
    after = response.json()
    assert after["step"] == 1
    assert len(after["facts"]) > 0
    # facts added by the action carry the step they appeared at
    assert all(f["step"] == 1 for f in after["facts"])


def test_apply_action_rejects_stale_step(client):
    snapshot = create_session(client)
    sid = snapshot["session_id"]
    client.post(f"/sessions/{sid}/actions/0", json={"step": 0})
    response = client.post(f"/sessions/{sid}/actions/0", json={"step": 0})
    assert response.status_code == 409
    body = response.json()
    assert body == {"error": "stale_action_index", "expected": 1, "got": 0}


def test_apply_action_rejects_bad_index(client):
    snapshot = create_session(client)
    sid = snapshot["session_id"]
    response = client.post(f"/sessions/{sid}/actions/99", json={"step": 0})
    assert response.status_code == 400
    assert response.json()["error"] == "index_out_of_range"


def test_undo_restores_previous_snapshot(client):
    snapshot = create_session(client)
    sid = snapshot["session_id"]
    before = client.get(f"/sessions/{sid}").json()
    client.post(f"/sessions/{sid}/actions/1", json={"step": 0})
    restored = client.post(f"/sessions/{sid}/undo")
    assert restored.status_code == 200
    assert restored.json() == before


def test_undo_on_fresh_session_conflicts(client):
    sid = create_session(client)["session_id"]
    response = client.post(f"/sessions/{sid}/undo")
    assert response.status_code == 409
    assert response.json()["error"] == "nothing_to_undo"


def test_autocomplete_ordered_session(client):
    snapshot = create_session(client, strategy="ordered", configuration=ELEMENT_A_TEXT)
    sid = snapshot["session_id"]
    response = client.post(f"/sessions/{sid}/autocomplete")
    assert response.status_code == 200
    body = response.json()
    assert body["autocompleted"] is True
    assert body["result"] == "solved"
    assert body["steps_added"] == 4
    assert body["valid"] is True
    assert body["step"] == 4
    # the completed configuration is exportable and valid
    export = client.get(f"/sessions/{sid}/export")
    assert export.status_code == 200
    assert is_valid(parse_configuration(export.text))


def test_autocomplete_reports_unsolvable_without_extending(client):
    text = "isA(1,moduleV).\nisA(2,frame).\nframe_module(2,1).\n"
    snapshot = create_session(client, strategy="ordered", configuration=text)
    sid = snapshot["session_id"]
    body = client.post(f"/sessions/{sid}/autocomplete").json()
    assert body["autocompleted"] is False
    assert body["result"] == "exhausted"
    assert body["steps_added"] == 0
    assert body["step"] == 0
    # nothing to undo: the failed attempt left no history behind
    assert client.post(f"/sessions/{sid}/undo").status_code == 409


def test_autocomplete_steps_can_be_undone(client):
    snapshot = create_session(client, strategy="ordered", configuration=ELEMENT_A_TEXT)
    sid = snapshot["session_id"]
    client.post(f"/sessions/{sid}/autocomplete")
    for expected_step in [3, 2, 1, 0]:
        body = client.post(f"/sessions/{sid}/undo").json()
        assert body["step"] == expected_step
    assert client.post(f"/sessions/{sid}/undo").status_code == 409


def test_export_matches_canonical_text(client):
    snapshot = create_session(client, configuration=ELEMENT_A_TEXT)
    sid = snapshot["session_id"]
    export = client.get(f"/sessions/{sid}/export")
    assert export.text == "isA(1,elementA).\n"


def test_fact_steps_track_first_appearance(client):
    sid = create_session(client)["session_id"]
    client.post(f"/sessions/{sid}/actions/0", json={"step": 0})
    body = client.post(f"/sessions/{sid}/actions/0", json={"step": 1}).json()
    steps = {f["fact"]: f["step"] for f in body["facts"]}
    assert set(steps.values()) == {1, 2}
    assert steps["isA(1,elementA)"] == 1


def test_sessions_are_isolated(client):
    a = create_session(client)["session_id"]
    b = create_session(client)["session_id"]
    assert a != b
    client.post(f"/sessions/{a}/actions/0", json={"step": 0})
    assert client.get(f"/sessions/{b}").json()["step"] == 0
    assert client.get(f"/sessions/{a}").json()["step"] == 1


def test_ui_three_step_walkthrough(client):
    """The interactive happy path: create an element, create a rack, assign."""
    sid = create_session(client)["session_id"]
    snap = client.get(f"/sessions/{sid}").json()
    assert snap["valid"] is True  # the empty configuration is valid
    by_label = {a["label"]: a["index"] for a in snap["actions"]}
    element = by_label["create_element(elementA)"]
    snap = client.post(f"/sessions/{sid}/actions/{element}", json={"step": 0}).json()
    assert snap["valid"] is False
    by_label = {a["label"]: a["index"] for a in snap["actions"]}
    rack = next(i for label, i in by_label.items() if "rackSingle" in label)
    snap = client.post(f"/sessions/{sid}/actions/{rack}", json={"step": 1}).json()
    assign = next(
        a["index"] for a in snap["actions"] if a["label"].startswith("assign_element")
    )
    snap = client.post(f"/sessions/{sid}/actions/{assign}", json={"step": 2}).json()
    assert snap["valid"] is True
    assert snap["step"] == 3
    export = client.get(f"/sessions/{sid}/export").text
    assert is_valid(parse_configuration(export))
