"""FastAPI layer: session-based online learners plus one-shot experiment,
bound and verification endpoints.

Each learner session is single-owner state behind a lock; predict and update
must alternate for a given session, matching the library contract. Run with
``uvicorn aioli.service:app``.
"""

from __future__ import annotations

import threading
import uuid
from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import bench, streams, verify

app = FastAPI(title="aioli", version="0.1.0",
              description="Improper online logistic regression service")


class LearnerSpec(BaseModel):
    algo: Literal["aioli", "ogd", "ons", "ftrl", "zero"] = "aioli"
    d: int = Field(ge=1)
    B: float = Field(gt=0)
    R: float = Field(gt=0, default=1.0)
    lam: float | None = Field(gt=0, default=None)
    horizon: int = Field(ge=1, default=1000,
                         description="planned number of rounds; sets the default inner tolerance")
    inner_steps: int | None = Field(ge=1, default=None)
    inner_tol: float | None = Field(gt=0, default=None)


class LearnerCreated(BaseModel):
    learner_id: str


class PredictRequest(BaseModel):
    x: list[float]


class PredictResponse(BaseModel):
    y_hat: float


class UpdateRequest(BaseModel):
    x: list[float]
    y: Literal[-1, 1]


class UpdateResponse(BaseModel):
    rounds_completed: int


class RunRequest(BaseModel):
    algo: Literal["aioli", "ogd", "ons", "ftrl", "zero"] = "aioli"
    stream: Literal["adversarial", "gaussian"] = "adversarial"
    n: int = Field(ge=1)
    d: int = Field(ge=1, default=1)
    B: float | None = Field(gt=0, default=None)
    R: float = Field(gt=0, default=1.0)
    lam: float | None = Field(gt=0, default=None)
    chi: Literal[-1, 1] = 1
    eps: float = Field(gt=0, lt=1, default=0.01)
    seed: int = 0


class RunResponse(BaseModel):
    algo: str
    n: int
    seed: int
    final_regret: float
    comparator_norm: float
    bound_thm1: float | None
    bound_ok: bool | None


class BoundResponse(BaseModel):
    bound: float


class CheckReport(BaseModel):
    name: str
    ok: bool
    min_slack: float


class VerifyResponse(BaseModel):
    all_ok: bool
    checks: list[CheckReport]


class _Session:
    def __init__(self, learner, d: int):
        self.learner = learner
        self.d = d
        self.lock = threading.Lock()
        self.rounds = 0
        self.awaiting_update = False


_sessions: dict[str, _Session] = {}


def _get_session(learner_id: str) -> _Session:
    sess = _sessions.get(learner_id)
    if sess is None:
        raise HTTPException(status_code=404, detail="unknown learner id")
    return sess


@app.post("/learners", response_model=LearnerCreated)
def create_learner(spec: LearnerSpec) -> LearnerCreated:
    lam = spec.lam if spec.lam is not None else 1.0 / spec.B ** 2
    try:
        learner = bench.make_learner(spec.algo, spec.d, spec.B, spec.R, lam,
                                     spec.horizon, spec.inner_steps, spec.inner_tol)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    learner_id = uuid.uuid4().hex
    _sessions[learner_id] = _Session(learner, spec.d)
    return LearnerCreated(learner_id=learner_id)


@app.post("/learners/{learner_id}/predict", response_model=PredictResponse)
def predict(learner_id: str, req: PredictRequest) -> PredictResponse:
    sess = _get_session(learner_id)
    if len(req.x) != sess.d:
        raise HTTPException(status_code=422, detail=f"expected {sess.d} features")
    with sess.lock:
        if sess.awaiting_update:
            raise HTTPException(status_code=409,
                                detail="predict called twice without an update")
        y_hat = sess.learner.predict(np.array(req.x))
        sess.awaiting_update = True
    return PredictResponse(y_hat=y_hat)


@app.post("/learners/{learner_id}/update", response_model=UpdateResponse)
def update(learner_id: str, req: UpdateRequest) -> UpdateResponse:
    sess = _get_session(learner_id)
    if len(req.x) != sess.d:
        raise HTTPException(status_code=422, detail=f"expected {sess.d} features")
    with sess.lock:
        if not sess.awaiting_update:
            raise HTTPException(status_code=409, detail="update without a prior predict")
        sess.learner.update(np.array(req.x), req.y)
        sess.awaiting_update = False
        sess.rounds += 1
        rounds = sess.rounds
    return UpdateResponse(rounds_completed=rounds)


@app.delete("/learners/{learner_id}")
def delete_learner(learner_id: str) -> dict:
    _get_session(learner_id)
    del _sessions[learner_id]
    return {"deleted": learner_id}


@app.post("/experiments/run", response_model=RunResponse)
def run_experiment(req: RunRequest) -> RunResponse:
    import math

    B = req.B if req.B is not None else (
        math.log(req.n) if req.stream == "adversarial" else 3.0)
    lam = req.lam if req.lam is not None else 1.0 / B ** 2
    d = 1 if req.stream == "adversarial" else req.d
    if req.stream == "adversarial":
        spec = streams.StreamSpec(kind="adversarial", n=req.n, seed=req.seed,
                                  chi=req.chi, eps=req.eps, B=B)
    else:
        spec = streams.StreamSpec(kind="gaussian", n=req.n, seed=req.seed,
                                  d=d, B=B, R=req.R)
    try:
        examples = streams.make_stream(spec)
        learner = bench.make_learner(req.algo, d, B, req.R, lam, req.n)
        trace = bench.run_experiment(learner, examples, B)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except bench.LearnerFailure as exc:
        raise HTTPException(status_code=500, detail=str(exc))
    theta_norm = float(np.linalg.norm(trace.comparator))
    bound = ok = None
    if req.algo == "aioli":
        bound = bench.theorem1_bound(lam, B, req.R, d, req.n, theta_norm)
        ok = trace.final_regret <= bound + 1e-3
    return RunResponse(algo=req.algo, n=req.n, seed=req.seed,
                       final_regret=trace.final_regret, comparator_norm=theta_norm,
                       bound_thm1=bound, bound_ok=ok)


@app.get("/bounds/theorem1", response_model=BoundResponse)
def bound_theorem1(lam: float, B: float, R: float, d: int, n: int,
                   theta_norm: float) -> BoundResponse:
    return BoundResponse(bound=bench.theorem1_bound(lam, B, R, d, n, theta_norm))


@app.get("/bounds/theorem4", response_model=BoundResponse)
def bound_theorem4(lam: float, B: float, R: float, d: int, n: int,
                   theta_norm: float, eps: float) -> BoundResponse:
    return BoundResponse(bound=bench.theorem4_bound(lam, B, R, d, n, theta_norm, eps))


@app.post("/verify", response_model=VerifyResponse)
def run_verify() -> VerifyResponse:
    results = verify.run_all()
    checks = [CheckReport(name=r.name, ok=r.ok, min_slack=r.min_slack) for r in results]
    return VerifyResponse(all_ok=all(r.ok for r in results), checks=checks)
