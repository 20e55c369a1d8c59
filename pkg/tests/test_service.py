import pytest
from fastapi.testclient import TestClient

from atkinson_ab.core import atkinson_share, utility
from atkinson_ab.service import create_app


@pytest.fixture()
def client():
    return TestClient(create_app())


def _utility_of(option: dict, eps: float) -> float:
    index = atkinson_share(option["total"], option["richest_share"], eps)
    return utility(option["total"], index)


class TestSessionEndpoints:
    def test_create_returns_first_question(self, client):
        resp = client.post("/sessions", json={})
        assert resp.status_code == 201
        body = resp.json()
        assert body["status"] == "active"
        assert body["interval"][0] < body["interval"][1]
        q = body["question"]
        assert set(q) == {"question_id", "option_a", "option_b"}
        for option in (q["option_a"], q["option_b"]):
            assert set(option) == {"total", "richest_share", "values"}
            hi, lo = option["values"]
            assert hi >= lo
            assert hi + lo == pytest.approx(option["total"])
        assert q["option_a"]["richest_share"] != q["option_b"]["richest_share"]

    def test_create_with_wide_tolerance_converges_immediately(self, client):
        resp = client.post("/sessions", json={"tolerance": 0.999})
        body = resp.json()
        assert body["status"] == "converged"
        assert "question" not in body
        assert body["epsilon"] == pytest.approx(0.5)

    def test_create_validates_domain(self, client):
        assert client.post("/sessions", json={"s1": 0.3}).status_code == 422
        assert client.post("/sessions", json={"total": -5}).status_code == 422
        assert client.post("/sessions", json={"tolerance": "abc"}).status_code == 422

    def test_get_unknown_session(self, client):
        assert client.get("/sessions/nope").status_code == 404

    def test_answer_unknown_session(self, client):
        resp = client.post("/sessions/nope/answers", json={"question_id": "q1", "choice": "A"})
        assert resp.status_code == 404

    def test_answer_stale_question(self, client):
        created = client.post("/sessions", json={}).json()
        sid = created["session_id"]
        resp = client.post(
            f"/sessions/{sid}/answers", json={"question_id": "q999", "choice": "A"}
        )
        assert resp.status_code == 409

    def test_answer_invalid_choice(self, client):
        created = client.post("/sessions", json={}).json()
        sid = created["session_id"]
        qid = created["question"]["question_id"]
        resp = client.post(f"/sessions/{sid}/answers", json={"question_id": qid, "choice": "C"})
        assert resp.status_code == 422

    def test_answer_advances_session(self, client):
        created = client.post("/sessions", json={}).json()
        sid = created["session_id"]
        qid = created["question"]["question_id"]
        resp = client.post(f"/sessions/{sid}/answers", json={"question_id": qid, "choice": "A"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["history_length"] == 1
        assert body["interval"][1] < created["interval"][1]
        assert body["question"]["question_id"] != qid

    def test_get_reflects_state(self, client):
        created = client.post("/sessions", json={}).json()
        sid = created["session_id"]
        state = client.get(f"/sessions/{sid}").json()
        assert state["session_id"] == sid
        assert state["question"]["question_id"] == created["question"]["question_id"]

    def test_closed_loop_recovers_epsilon(self, client):
        true_eps = 0.5
        body = client.post("/sessions", json={"tolerance": 0.02}).json()
        sid = body["session_id"]
        answers = 0
        while body["status"] == "active":
            q = body["question"]
            choice = (
                "A"
                if _utility_of(q["option_a"], true_eps) > _utility_of(q["option_b"], true_eps)
                else "B"
            )
            body = client.post(
                f"/sessions/{sid}/answers",
                json={"question_id": q["question_id"], "choice": choice},
            ).json()
            answers += 1
            assert answers <= 7
        assert body["status"] == "converged"
        assert abs(body["epsilon"] - true_eps) <= 0.02
        assert body["history_length"] == answers

    def test_converged_session_rejects_further_answers(self, client):
        body = client.post("/sessions", json={"tolerance": 0.999}).json()
        resp = client.post(
            f"/sessions/{body['session_id']}/answers",
            json={"question_id": "q1", "choice": "A"},
        )
        assert resp.status_code == 409

    def test_healthz(self, client):
        assert client.get("/healthz").json() == {"status": "ok"}
