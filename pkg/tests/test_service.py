"""Tests for the FastAPI service layer."""

import math

import pytest
from fastapi.testclient import TestClient

from aioli.service import app

client = TestClient(app)


def make_learner(**overrides):
    payload = dict(algo="aioli", d=2, B=2.0, R=1.0, horizon=100)
    payload.update(overrides)
    resp = client.post("/learners", json=payload)
    assert resp.status_code == 200
    return resp.json()["learner_id"]


class TestSessions:
    def test_create_predict_update_cycle(self):
        lid = make_learner()
        resp = client.post(f"/learners/{lid}/predict", json={"x": [0.1, 0.2]})
        assert resp.status_code == 200
        assert resp.json()["y_hat"] == pytest.approx(0.0, abs=1e-12)
        resp = client.post(f"/learners/{lid}/update", json={"x": [0.1, 0.2], "y": 1})
        assert resp.status_code == 200
        assert resp.json()["rounds_completed"] == 1

    def test_predict_twice_conflicts(self):
        lid = make_learner()
        client.post(f"/learners/{lid}/predict", json={"x": [0.1, 0.2]})
        resp = client.post(f"/learners/{lid}/predict", json={"x": [0.1, 0.2]})
        assert resp.status_code == 409

    def test_update_without_predict_conflicts(self):
        lid = make_learner()
        resp = client.post(f"/learners/{lid}/update", json={"x": [0.1, 0.2], "y": 1})
        assert resp.status_code == 409

    def test_unknown_learner_404(self):
        resp = client.post("/learners/nope/predict", json={"x": [0.1, 0.2]})
        assert resp.status_code == 404

    def test_dimension_mismatch_422(self):
        lid = make_learner()
        resp = client.post(f"/learners/{lid}/predict", json={"x": [0.1]})
        assert resp.status_code == 422

    def test_bad_label_422(self):
        lid = make_learner()
        client.post(f"/learners/{lid}/predict", json={"x": [0.1, 0.2]})
        resp = client.post(f"/learners/{lid}/update", json={"x": [0.1, 0.2], "y": 0})
        assert resp.status_code == 422

    def test_delete(self):
        lid = make_learner()
        assert client.delete(f"/learners/{lid}").status_code == 200
        resp = client.post(f"/learners/{lid}/predict", json={"x": [0.1, 0.2]})
        assert resp.status_code == 404

    def test_invalid_spec_422(self):
        resp = client.post("/learners", json={"algo": "aioli", "d": 2, "B": -1.0})
        assert resp.status_code == 422


class TestExperiments:
    def test_adversarial_run_with_bound(self):
        resp = client.post("/experiments/run",
                           json={"algo": "aioli", "stream": "adversarial",
                                 "n": 300, "seed": 0})
        assert resp.status_code == 200
        body = resp.json()
        assert body["bound_ok"] is True
        assert body["final_regret"] <= body["bound_thm1"] + 1e-3

    def test_baseline_has_no_bound(self):
        resp = client.post("/experiments/run",
                           json={"algo": "ogd", "stream": "gaussian",
                                 "n": 50, "d": 2, "B": 2.0, "seed": 1})
        assert resp.status_code == 200
        assert resp.json()["bound_thm1"] is None

    def test_deterministic(self):
        req = {"algo": "aioli", "stream": "adversarial", "n": 200, "seed": 3}
        a = client.post("/experiments/run", json=req).json()
        b = client.post("/experiments/run", json=req).json()
        assert a == b


class TestBounds:
    def test_theorem1_endpoint(self):
        resp = client.get("/bounds/theorem1",
                          params=dict(lam=1.0, B=1.0, R=1.0, d=1, n=100,
                                      theta_norm=1.0))
        assert resp.status_code == 200
        want = 1.0 + 2.0 * math.log(1.0 + 100.0 / 16.0)
        assert resp.json()["bound"] == pytest.approx(want, rel=1e-12)

    def test_theorem4_endpoint(self):
        resp = client.get("/bounds/theorem4",
                          params=dict(lam=1.0, B=1.0, R=1.0, d=1, n=1000,
                                      theta_norm=1.0, eps=1e-6))
        base = client.get("/bounds/theorem1",
                          params=dict(lam=1.0, B=1.0, R=1.0, d=1, n=1000,
                                      theta_norm=1.0)).json()["bound"]
        assert resp.json()["bound"] - base == pytest.approx(0.378, rel=1e-9)


class TestVerifyEndpoint:
    def test_all_checks_pass(self):
        resp = client.post("/verify")
        assert resp.status_code == 200
        body = resp.json()
        assert body["all_ok"] is True
        assert len(body["checks"]) == 7
