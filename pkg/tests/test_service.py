import json

import pytest
from fastapi.testclient import TestClient

from ispace.core import Assignment, program_from_json, program_to_json, resolve_given
from ispace.service import create_app
from ispace.specialize import specialize

from conftest import fixture_text


@pytest.fixture()
def client(congress):
    app = create_app(models={"congress": congress})
    with TestClient(app) as client:
        yield client


def new_session(client, model="congress"):
    response = client.post("/sessions", json={"model": model})
    assert response.status_code == 200
    return response.json()


# ---------------------------------------------------------------------------
# models

def test_upload_and_fetch_model(client):
    source = fixture_text("congress_dem.ispace")
    created = client.post("/models", json={"source": source})
    assert created.status_code == 200
    model_id = created.json()["id"]
    assert model_id == "m1"
    fetched = client.get(f"/models/{model_id}").json()
    assert fetched["program"]["root"]["kind"] == "chain"
    # canonically reserialized, not echoed
    assert "mutex Branch { Repr, Sen }" in fetched["source"]


def test_upload_with_custom_id(client):
    source = fixture_text("congress_dem.ispace")
    created = client.post("/models", json={"source": source, "id": "dem"})
    assert created.json()["id"] == "dem"
    assert "dem" in client.get("/models").json()["models"]


def test_upload_bad_source_is_syntax_error(client):
    response = client.post("/models", json={"source": "if (A) {"})
    assert response.status_code == 400
    body = response.json()
    assert body["error"] == "SyntaxError"


def test_model_listing(client):
    assert client.get("/models").json() == {"models": ["congress"]}


def test_unknown_model_404(client):
    assert client.get("/models/nope").status_code == 404
    response = client.post("/sessions", json={"model": "nope"})
    assert response.status_code == 404
    assert response.json()["error"] == "UnknownModel"


def test_missing_fields_rejected_by_validation(client):
    assert client.post("/models", json={}).status_code == 422
    assert client.post("/sessions", json={}).status_code == 422


# ---------------------------------------------------------------------------
# session lifecycle

def test_fresh_session_view(client, congress):
    view = new_session(client)
    assert view["model"] == "congress"
    assert view["complete"] is False
    assert view["breadcrumb"] == []
    assert program_from_json(view["residual"]) == congress
    assert [t["key"] for t in view["available"]] == ["Sen", "Repr"]
    assert view["available"][0]["label"] == "Sen"


def test_browse_narrows_available(client):
    token = new_session(client)["session"]
    view = client.post(f"/sessions/{token}/browse", json={"key": "Sen"}).json()
    assert [t["key"] for t in view["available"]] == ["Dem", "Rep"]
    assert view["breadcrumb"] == [{"action": "browse", "set": {"Sen": "true"}}]


def test_browse_rejects_unoffered_arm(client):
    token = new_session(client)["session"]
    # CA sits below the branch choice; it is not on offer yet
    response = client.post(f"/sessions/{token}/browse", json={"key": "CA"})
    assert response.status_code == 409
    assert response.json()["error"] == "NoSuchArm"
    view = client.get(f"/sessions/{token}/view").json()
    assert view["breadcrumb"] == []


def test_input_accepts_group_names(client):
    token = new_session(client)["session"]
    view = client.post(
        f"/sessions/{token}/input", json={"set": {"Party": "Dem"}}
    ).json()
    assert view["breadcrumb"] == [{"action": "input", "set": {"Dem": "true"}}]
    assert [t["key"] for t in view["available"]] == ["Sen", "Repr"]


def test_input_accepts_denials(client, congress):
    token = new_session(client)["session"]
    view = client.post(
        f"/sessions/{token}/input", json={"set": {"Dem": "!true"}}
    ).json()
    expected = specialize(
        congress, resolve_given(congress, {"Dem": "!true"})
    ).residual
    assert program_from_json(view["residual"]) == expected


def test_mixed_initiative_equivalence(client, congress):
    # browsing clicks and volunteered inputs land on the same residual
    a = new_session(client)["session"]
    client.post(f"/sessions/{a}/browse", json={"key": "Sen"})
    client.post(f"/sessions/{a}/browse", json={"key": "Dem"})
    via_browse = client.get(f"/sessions/{a}/view").json()

    b = new_session(client)["session"]
    client.post(f"/sessions/{b}/input", json={"set": {"Sen": True, "Party": "Dem"}})
    via_input = client.get(f"/sessions/{b}/view").json()

    assert via_browse["residual"] == via_input["residual"]
    assert via_browse["available"] == via_input["available"]

    merged = resolve_given(congress, {"Sen": True, "Dem": True})
    assert program_to_json(specialize(congress, merged).residual) == via_browse["residual"]


def test_conflicting_input_leaves_session_unchanged(client):
    token = new_session(client)["session"]
    client.post(f"/sessions/{token}/input", json={"set": {"Dem": True}})
    before = client.get(f"/sessions/{token}/view").json()

    response = client.post(f"/sessions/{token}/input", json={"set": {"Rep": True}})
    assert response.status_code == 409
    assert response.json()["error"] == "InconsistentAssignment"

    after = client.get(f"/sessions/{token}/view").json()
    assert after == before


def test_conflict_within_one_request(client):
    token = new_session(client)["session"]
    response = client.post(
        f"/sessions/{token}/input",
        json={"set": [["Dem", True], ["Rep", True]]},
    )
    assert response.status_code == 409
    assert client.get(f"/sessions/{token}/view").json()["breadcrumb"] == []


def test_undo_and_reset(client, congress):
    token = new_session(client)["session"]
    client.post(f"/sessions/{token}/browse", json={"key": "Sen"})
    after_sen = client.get(f"/sessions/{token}/view").json()
    client.post(f"/sessions/{token}/browse", json={"key": "Dem"})

    undone = client.post(f"/sessions/{token}/undo").json()
    assert undone["residual"] == after_sen["residual"]
    assert len(undone["breadcrumb"]) == 1

    reset = client.post(f"/sessions/{token}/reset").json()
    assert reset["breadcrumb"] == []
    assert program_from_json(reset["residual"]) == congress


def test_undo_empty_history_conflict(client):
    token = new_session(client)["session"]
    response = client.post(f"/sessions/{token}/undo")
    assert response.status_code == 409
    assert response.json()["error"] == "EmptyHistory"


def test_completion_flow(client):
    token = new_session(client)["session"]
    client.post(f"/sessions/{token}/browse", json={"key": "Sen"})
    view = client.post(
        f"/sessions/{token}/input", json={"set": {"Dem": True, "CA": True}}
    ).json()
    assert view["complete"] is True
    assert view["available"] == []
    assert view["residual"]["root"] == {
        "kind": "content",
        "ref": "sen-dem-ca",
        "payload": "",
    }


def test_unknown_session_404(client):
    assert client.get("/sessions/nope/view").status_code == 404
    assert client.post("/sessions/nope/input", json={"set": {}}).status_code == 404


def test_replay_matches_module_computation(client, congress):
    token = new_session(client)["session"]
    client.post(f"/sessions/{token}/browse", json={"key": "Repr"})
    client.post(f"/sessions/{token}/input", json={"set": {"State": "NY"}})
    view = client.get(f"/sessions/{token}/view").json()

    merged = Assignment()
    for step in view["breadcrumb"]:
        merged = merged.merge(resolve_given(congress, step["set"]))
    assert view["residual"] == program_to_json(specialize(congress, merged).residual)


def test_cors_headers_present(client):
    response = client.get("/models", headers={"Origin": "http://localhost:5173"})
    assert response.headers.get("access-control-allow-origin") == "*"


# ---------------------------------------------------------------------------
# persistence

def test_snapshot_round_trip(congress, tmp_path):
    snap = tmp_path / "snap.json"
    source_app = create_app(models={"congress": congress}, snapshot=snap)
    with TestClient(source_app) as client:
        token = new_session(client)["session"]
        client.post(f"/sessions/{token}/browse", json={"key": "Sen"})
        expected = client.get(f"/sessions/{token}/view").json()
    assert snap.exists()
    data = json.loads(snap.read_text())
    assert set(data["models"]) == {"congress"}

    revived_app = create_app(snapshot=snap)
    with TestClient(revived_app) as client:
        view = client.get(f"/sessions/{token}/view").json()
        assert view == expected


def test_models_dir_loading(congress, tmp_path):
    (tmp_path / "congress.ispace").write_text(fixture_text("congress.ispace"))
    (tmp_path / "dem.ispace").write_text(fixture_text("congress_dem.ispace"))
    app = create_app(models_dir=tmp_path)
    with TestClient(app) as client:
        assert client.get("/models").json() == {"models": ["congress", "dem"]}
        view = new_session(client, model="dem")
        # the party level is already decided away in the dem model
        assert [t["key"] for t in view["available"]] == ["Sen", "Repr"]
        token = view["session"]
        narrowed = client.post(f"/sessions/{token}/browse", json={"key": "Sen"}).json()
        assert [t["key"] for t in narrowed["available"]] == ["CA", "NY"]
