import pytest
from fastapi.testclient import TestClient

from corefkit.conllu import parse_conllu
from corefkit.corpus import Corpus
from corefkit.model import Clustering
from corefkit.passages import SplitConfig
from corefkit.service import create_app
from corefkit.store import AnnotationStore
from corefkit.tutorial import example_script


@pytest.fixture()
def store(tmp_path, examples_conllu):
    corpus = Corpus(documents=parse_conllu(examples_conllu))
    corpus.split(SplitConfig(target_tokens=20, min_tail_tokens=5))
    corpus.detect()
    return AnnotationStore.initialize(tmp_path / "store", corpus,
                                      example_script(), target_annotations=2)


@pytest.fixture()
def client(store):
    return TestClient(create_app(store), raise_server_exceptions=False)


def register(client) -> dict:
    resp = client.post("/api/annotators", json={"name": "tester"})
    assert resp.status_code == 201
    return resp.json()


def auth(token) -> dict:
    return {"Authorization": f"Bearer {token}"}


def pass_tutorial(client, store, token):
    for i, step in enumerate(store.tutorial.steps):
        resp = client.post(f"/api/tutorial/steps/{i}",
                           json={"clusters": step.gold_clusters},
                           headers=auth(token))
        assert resp.status_code == 200, resp.text
    assert resp.json()["kind"] == "screening"
    assert resp.json()["passed"]
    return resp.json()


def test_healthz(client):
    resp = client.get("/healthz")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_register_issues_token(client):
    out = register(client)
    assert out["annotator_id"].startswith("ann-")
    assert len(out["token"]) == 32
    assert out["tutorial_steps"] == 5


def test_tutorial_payload_hides_gold(client):
    token = register(client)["token"]
    resp = client.get("/api/tutorial", headers=auth(token))
    assert resp.status_code == 200
    body = resp.json()
    assert body["next_step"] == 0
    for step in body["steps"]:
        assert "gold_clusters" not in step
        assert "feedback" not in step
        assert {"step_id", "prompt", "tokens", "mentions",
                "is_screening"} <= set(step)


def test_missing_token_is_401(client):
    assert client.get("/api/tutorial").status_code == 401
    assert client.get("/api/assignments/next",
                      headers=auth("beefbeef")).status_code == 401


def test_tutorial_flow_and_screening(client, store):
    token = register(client)["token"]
    out = pass_tutorial(client, store, token)
    assert out["b3_f1"] == 1.0


def test_wrong_tutorial_answer_gives_feedback(client, store):
    token = register(client)["token"]
    step = store.tutorial.steps[0]
    merged = [[m["mention_id"] for m in step.mentions]]
    resp = client.post("/api/tutorial/steps/0", json={"clusters": merged},
                       headers=auth(token))
    assert resp.status_code == 200
    body = resp.json()
    assert body["kind"] == "feedback"
    assert not body["correct"]
    assert body["wrong_links"]


def test_out_of_order_step_is_400(client):
    token = register(client)["token"]
    resp = client.post("/api/tutorial/steps/3", json={"clusters": []},
                       headers=auth(token))
    assert resp.status_code == 400
    assert resp.json()["code"] == "invalid_request"


def test_unscreened_assignment_is_403(client):
    token = register(client)["token"]
    resp = client.get("/api/assignments/next", headers=auth(token))
    assert resp.status_code == 403
    assert resp.json()["code"] == "not_authorized"


def test_annotation_cycle(client, store):
    token = register(client)["token"]
    pass_tutorial(client, store, token)

    resp = client.get("/api/assignments/next", headers=auth(token))
    assert resp.status_code == 200
    assignment = resp.json()["assignment"]
    assert assignment is not None
    pid = assignment["passage_id"]

    resp = client.get(f"/api/passages/{pid}", headers=auth(token))
    assert resp.status_code == 200
    payload = resp.json()
    assert payload["draft"] is None
    mention_ids = [m["mention_id"] for m in payload["mentions"]]
    assert mention_ids

    resp = client.post("/api/annotations", headers=auth(token),
                       json={"passage_id": pid,
                             "clusters": [[m] for m in mention_ids]})
    assert resp.status_code == 200
    assert resp.json() == {"status": "accepted", "replaced": False}

    # the saved annotation comes back as a draft
    resp = client.get(f"/api/passages/{pid}", headers=auth(token))
    assert resp.json()["draft"]["annotator_id"] == \
        store.annotator_by_token(token)["annotator_id"]


def test_incomplete_submission_is_422(client, store):
    token = register(client)["token"]
    pass_tutorial(client, store, token)
    pid = client.get("/api/assignments/next",
                     headers=auth(token)).json()["assignment"]["passage_id"]
    mention_ids = store.corpus.passage(pid).mentions.ids()
    resp = client.post("/api/annotations", headers=auth(token),
                       json={"passage_id": pid,
                             "clusters": [[m] for m in mention_ids[:-1]]})
    assert resp.status_code == 422
    body = resp.json()
    assert body["code"] == "partition_violation"
    assert body["details"]["missing"] == [mention_ids[-1]]


def test_submit_without_lease_is_409(client, store):
    token = register(client)["token"]
    pass_tutorial(client, store, token)
    pid = store.corpus.passages[0].passage_id
    mention_ids = store.corpus.passage(pid).mentions.ids()
    resp = client.post("/api/annotations", headers=auth(token),
                       json={"passage_id": pid,
                             "clusters": [[m] for m in mention_ids]})
    assert resp.status_code == 409
    assert resp.json()["code"] == "lease_conflict"


def test_unknown_passage_is_404(client, store):
    token = register(client)["token"]
    resp = client.get("/api/passages/nope", headers=auth(token))
    assert resp.status_code == 404


def test_admin_reports(client, store):
    token = register(client)["token"]
    pass_tutorial(client, store, token)
    while True:
        assignment = client.get("/api/assignments/next",
                                headers=auth(token)).json()["assignment"]
        if assignment is None:
            break
        pid = assignment["passage_id"]
        ids = store.corpus.passage(pid).mentions.ids()
        client.post("/api/annotations", headers=auth(token),
                    json={"passage_id": pid, "clusters": [[m] for m in ids]})

    resp = client.get("/api/admin/reports", params={"kind": "aggregate",
                                                    "tau": 1})
    assert resp.status_code == 200
    assert resp.json()["kind"] == "aggregate"

    resp = client.get("/api/admin/reports", params={"kind": "iaa"})
    assert resp.status_code == 200

    resp = client.get("/api/admin/reports", params={"kind": "scores"})
    assert resp.status_code == 404  # no gold given


def test_failed_screening_locks_out(client, store):
    token = register(client)["token"]
    for i, step in enumerate(store.tutorial.steps[:-1]):
        client.post(f"/api/tutorial/steps/{i}",
                    json={"clusters": step.gold_clusters},
                    headers=auth(token))
    screening = store.tutorial.steps[-1]
    everything = [[m["mention_id"] for m in screening.mentions]]
    resp = client.post(f"/api/tutorial/steps/{len(store.tutorial.steps) - 1}",
                       json={"clusters": everything}, headers=auth(token))
    assert resp.status_code == 200
    assert resp.json()["kind"] == "screening"
    assert not resp.json()["passed"]
    assert client.get("/api/assignments/next",
                      headers=auth(token)).status_code == 403
