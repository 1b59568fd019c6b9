import json
import threading

import pytest
from fastapi.testclient import TestClient

import taskchat as tc
from taskchat.service import DialogService, DomainRuntime, create_app


class FakeClock:
    def __init__(self, now=1000.0):
        self.now = now

    def __call__(self):
        return self.now


@pytest.fixture()
def runtime(movie_schema, sample_kb, sample_goals, templates):
    return DomainRuntime(schema=movie_schema, kb=sample_kb, goals=list(sample_goals),
                         templates=templates)


@pytest.fixture()
def service(runtime, tmp_path):
    return DialogService({"movie": runtime}, data_dir=str(tmp_path), seed=5,
                         clock=FakeClock())


@pytest.fixture()
def client(service):
    return TestClient(create_app(service))


def drive_to_booking(client, sid, goal):
    """Play a cooperative user against the rule agent until the session ends."""
    informs = ";".join(f"{s}={v}" for s, v in goal["inform_slots"].items())
    for _ in range(20):
        r = client.post(f"/api/sessions/{sid}/messages", json={"frame": f"inform({informs})"})
        assert r.status_code == 200
        if r.json()["session_status"] == "ended":
            return r.json()
    raise AssertionError("session never ended")


def test_create_session(client):
    r = client.post("/api/sessions", json={"domain": "movie", "agent_kind": "rule"})
    assert r.status_code == 200
    body = r.json()
    assert body["greeting"] == "Hello! How may I help you?"
    assert body["goal"]["request_slots"]
    assert body["session_id"]


def test_unknown_domain_404(client):
    r = client.post("/api/sessions", json={"domain": "flights", "agent_kind": "rule"})
    assert r.status_code == 404
    assert r.json()["error"]["code"] == "UnknownDomain"


def test_bad_agent_kind_422(client):
    r = client.post("/api/sessions", json={"domain": "movie", "agent_kind": "oracle"})
    assert r.status_code == 422


def test_rl_without_checkpoint_422(client):
    r = client.post("/api/sessions", json={"domain": "movie", "agent_kind": "rl"})
    assert r.status_code == 422
    assert r.json()["error"]["code"] == "BadCheckpoint"


def test_session_ids_distinct(client):
    a = client.post("/api/sessions", json={"domain": "movie", "agent_kind": "rule"}).json()
    b = client.post("/api/sessions", json={"domain": "movie", "agent_kind": "rule"}).json()
    assert a["session_id"] != b["session_id"]


def test_text_message_roundtrip(client):
    sid = client.post("/api/sessions", json={"domain": "movie", "agent_kind": "rule"}).json()["session_id"]
    r = client.post(f"/api/sessions/{sid}/messages", json={"text": "I want 2 tickets please!"})
    body = r.json()
    assert body["user_frame"] == "inform(numberofpeople=2)"
    assert body["agent_frame"].startswith("request(")
    assert body["agent_utterance"]


def test_frame_message_and_debug_echo(client):
    sid = client.post("/api/sessions", json={"domain": "movie", "agent_kind": "rule"}).json()["session_id"]
    r = client.post(f"/api/sessions/{sid}/messages",
                    json={"frame": "request(moviename;genre=action;date=this weekend)"})
    assert r.status_code == 200
    assert r.json()["user_frame"] == "request(moviename;date=this weekend;genre=action)"


def test_malformed_frame_400(client):
    sid = client.post("/api/sessions", json={"domain": "movie", "agent_kind": "rule"}).json()["session_id"]
    r = client.post(f"/api/sessions/{sid}/messages", json={"frame": "foo("})
    assert r.status_code == 400
    assert r.json()["error"]["code"] == "ParseError"


def test_message_after_end_409(client):
    created = client.post("/api/sessions", json={"domain": "movie", "agent_kind": "rule"}).json()
    sid = created["session_id"]
    drive_to_booking(client, sid, created["goal"])
    r = client.post(f"/api/sessions/{sid}/messages", json={"text": "hello?"})
    assert r.status_code == 409
    assert r.json()["error"]["code"] == "SessionEnded"


def test_rating_flow(client):
    created = client.post("/api/sessions", json={"domain": "movie", "agent_kind": "rule"}).json()
    sid = created["session_id"]
    early = client.post(f"/api/sessions/{sid}/rating", json={"rating": 5})
    assert early.status_code == 409 and early.json()["error"]["code"] == "NotEnded"
    drive_to_booking(client, sid, created["goal"])
    assert client.post(f"/api/sessions/{sid}/rating", json={"rating": 0}).status_code == 400
    assert client.post(f"/api/sessions/{sid}/rating", json={"rating": 6}).status_code == 400
    ok = client.post(f"/api/sessions/{sid}/rating", json={"rating": 5})
    assert ok.status_code == 200
    again = client.post(f"/api/sessions/{sid}/rating", json={"rating": 4})
    assert again.status_code == 409 and again.json()["error"]["code"] == "AlreadyRated"
    assert client.get(f"/api/sessions/{sid}").json()["rating"] == 5


def test_transcript_length_invariant(client):
    created = client.post("/api/sessions", json={"domain": "movie", "agent_kind": "rule"}).json()
    sid = created["session_id"]
    for i in range(3):
        client.post(f"/api/sessions/{sid}/messages", json={"text": f"message {i}"})
    view = client.get(f"/api/sessions/{sid}").json()
    assert len(view["transcript"]) == 1 + 3 * 2  # greeting + (user, agent) per message


def test_report_mean_matches_export(client):
    ratings = [5, 3]
    for want in ratings:
        created = client.post("/api/sessions", json={"domain": "movie", "agent_kind": "rule"}).json()
        drive_to_booking(client, created["session_id"], created["goal"])
        client.post(f"/api/sessions/{created['session_id']}/rating", json={"rating": want})
    report = client.get("/api/report").json()
    assert report["n_rated"] == 2
    assert report["mean_rating"] == 4.0
    assert report["mean_rating_exact"] == "4"
    exported = [json.loads(line) for line in client.get("/api/export").text.strip().splitlines()]
    exported_ratings = [doc["rating"] for doc in exported if doc["rating"] is not None]
    assert sum(exported_ratings) / len(exported_ratings) == report["mean_rating"]


def test_export_filter_by_agent_kind(client):
    created = client.post("/api/sessions", json={"domain": "movie", "agent_kind": "rule"}).json()
    drive_to_booking(client, created["session_id"], created["goal"])
    assert len(client.get("/api/export", params={"agent_kind": "rule"}).text.strip().splitlines()) == 1
    assert client.get("/api/export", params={"agent_kind": "rl"}).text.strip() == ""


def test_export_stable_field_order(client):
    created = client.post("/api/sessions", json={"domain": "movie", "agent_kind": "rule"}).json()
    drive_to_booking(client, created["session_id"], created["goal"])
    line = client.get("/api/export").text.strip().splitlines()[0]
    keys = list(json.loads(line).keys())
    assert keys == ["id", "domain", "agent_kind", "created_at", "status", "outcome",
                    "failure_reason", "rating", "goal", "transcript"]


def test_idle_timeout_autoends_as_failure(runtime, tmp_path):
    clock = FakeClock()
    service = DialogService({"movie": runtime}, data_dir=str(tmp_path), seed=5,
                            idle_timeout=1800.0, clock=clock)
    created = service.create_session("movie", "rule")
    clock.now += 1801
    view = service.get_session(created["session_id"])
    assert view["status"] == "ended"
    assert view["outcome"] == "failure"
    assert view["failure_reason"] == "idle_timeout"


def test_restart_replays_log(runtime, tmp_path):
    clock = FakeClock()
    service = DialogService({"movie": runtime}, data_dir=str(tmp_path), seed=5, clock=clock)
    created = service.create_session("movie", "rule")
    sid = created["session_id"]
    service.post_message(sid, {"text": "I want 2 tickets please!"})
    reborn = DialogService({"movie": runtime}, data_dir=str(tmp_path), seed=5, clock=clock)
    view = reborn.get_session(sid)
    assert view["status"] == "open"
    assert len(view["transcript"]) == 3
    # the rebuilt agent keeps its place in the slot-collection order
    reply = reborn.post_message(sid, {"frame": "inform(moviename=zoolander 2)"})
    assert reply["agent_frame"] == "request(starttime)"


def test_rl_session_with_checkpoint(movie_schema, sample_kb, sample_goals, templates,
                                    tmp_path):
    q = tc.QFunction(tc.feature_size(movie_schema), len(tc.feasible_actions(movie_schema)),
                     hidden=8, seed=0)
    ckpt = str(tmp_path / "ck.json")
    tc.save_checkpoint(ckpt, q, movie_schema)
    runtime = DomainRuntime(schema=movie_schema, kb=sample_kb, goals=list(sample_goals),
                            templates=templates, checkpoint_path=ckpt)
    service = DialogService({"movie": runtime}, data_dir=str(tmp_path / "data"), seed=5)
    client = TestClient(create_app(service))
    r = client.post("/api/sessions", json={"domain": "movie", "agent_kind": "rl"})
    assert r.status_code == 200
    r = client.post(f"/api/sessions/{r.json()['session_id']}/messages",
                    json={"text": "I want 2 tickets please!"})
    assert r.status_code == 200


def test_concurrent_messages_serialized(service):
    created = service.create_session("movie", "rule")
    sid = created["session_id"]
    errors = []

    def send(i):
        try:
            service.post_message(sid, {"text": f"message number {i}"})
        except tc.ServiceError as e:  # SessionEnded is acceptable once booked
            errors.append(e)

    threads = [threading.Thread(target=send, args=(i,)) for i in range(6)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    transcript = service.get_session(sid)["transcript"]
    speakers = [t["speaker"] for t in transcript]
    assert speakers[0] == "agent"  # greeting
    for i in range(1, len(speakers) - 1, 2):
        assert (speakers[i], speakers[i + 1]) == ("user", "agent")
