"""Regret accounting, comparator computation and theoretical-bound calculators."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import baselines, forecaster, streams
from .loss import Example, logistic_loss


@dataclass
class RegretTrace:
    """Per-round record of one learner/stream run."""

    losses: list[float] = field(default_factory=list)
    predict_ns: list[int] = field(default_factory=list)
    update_ns: list[int] = field(default_factory=list)
    comparator: np.ndarray | None = None
    comparator_losses: list[float] = field(default_factory=list)
    cum_regret: list[float] = field(default_factory=list)
    failed: bool = False

    @property
    def final_regret(self) -> float:
        return self.cum_regret[-1]


class LearnerFailure(RuntimeError):
    """Raised when a learner aborts mid-stream; carries the partial trace."""

    def __init__(self, trace: RegretTrace, cause: BaseException):
        super().__init__(f"learner failed after {len(trace.losses)} rounds: {cause}")
        self.trace = trace
        self.cause = cause


def _kahan_cumsum(values: list[float]) -> list[float]:
    # compensated summation so the final entry equals the exact pairwise total
    total = 0.0
    comp = 0.0
    out = []
    for v in values:
        y = v - comp
        s = total + y
        comp = (s - total) - y
        total = s
        out.append(total)
    return out


def best_in_ball(examples: list[Example], B: float, tol: float = 1e-8,
                 max_iter: int = 50_000) -> np.ndarray:
    """Comparator: projected gradient with backtracking on the cumulative loss.

    Runs until the projected-gradient norm (at the reference step) is below
    ``tol``. The problem is convex, so this is the global minimizer of the
    total logistic loss over the B-ball up to that tolerance.
    """
    if not examples:
        raise ValueError("empty example list")
    X = np.stack([ex.x for ex in examples])
    Y = np.array([ex.y for ex in examples], dtype=float)
    d = X.shape[1]

    def value(th):
        return float(np.sum(np.logaddexp(0.0, -Y * (X @ th))))

    def grad(th):
        sig = 1.0 / (1.0 + np.exp(np.clip(Y * (X @ th), -500, 500)))
        return -(X.T @ (Y * sig))

    lip = 0.25 * float(np.sum(X * X))  # crude but safe Lipschitz bound
    step0 = 1.0 / max(lip, 1e-12)
    theta = np.zeros(d)
    step = step0
    f = value(theta)
    for _ in range(max_iter):
        g = grad(theta)
        ref = baselines.project_ball(theta - step0 * g, B)
        if np.linalg.norm(theta - ref) / step0 <= tol:
            return theta
        # backtrack from a growing trial step, but never below 1/L where
        # sufficient decrease holds analytically (rounding noise aside)
        step = min(step * 2.0, 1e6 * step0)
        while step > step0:
            cand = baselines.project_ball(theta - step * g, B)
            fc = value(cand)
            diff = cand - theta
            if fc <= f + float(np.dot(g, diff)) + float(np.dot(diff, diff)) / (2.0 * step):
                break
            step *= 0.5
        else:
            step = step0
            cand = baselines.project_ball(theta - step * g, B)
            fc = value(cand)
        theta, f = cand, fc
    return theta


def run_experiment(learner, examples: list[Example], B: float) -> RegretTrace:
    """Play the stream, then fill comparator losses and cumulative regret."""
    trace = RegretTrace()
    try:
        for ex in examples:
            t0 = time.perf_counter_ns()
            y_hat = learner.predict(ex.x)
            t1 = time.perf_counter_ns()
            trace.losses.append(logistic_loss(y_hat, ex.y))
            t2 = time.perf_counter_ns()
            learner.update(ex.x, ex.y)
            t3 = time.perf_counter_ns()
            trace.predict_ns.append(t1 - t0)
            trace.update_ns.append(t3 - t2)
    except Exception as exc:
        trace.failed = True
        raise LearnerFailure(trace, exc) from exc
    trace.comparator = best_in_ball(examples, B)
    trace.comparator_losses = [
        logistic_loss(float(np.dot(trace.comparator, ex.x)), ex.y) for ex in examples
    ]
    trace.cum_regret = _kahan_cumsum(
        [l - c for l, c in zip(trace.losses, trace.comparator_losses)]
    )
    return trace


def theorem1_bound(lam: float, B: float, R: float, d: int, n: int,
                   theta_norm: float) -> float:
    """Regret upper bound: lam ||theta||^2 + d(1+BR) log(1 + nR^2/(8d(1+BR)lam))."""
    return (lam * theta_norm ** 2
            + d * (1.0 + B * R) * math.log1p(n * R * R / (8.0 * d * (1.0 + B * R) * lam)))


def theorem1_bound_default_lambda(B: float, R: float, d: int, n: int) -> float:
    """The lam = 1/B^2 specialization: d(1+BR) log(1 + nB^2R^2/(8d(1+BR))) + 1."""
    return d * (1.0 + B * R) * math.log1p(n * B * B * R * R / (8.0 * d * (1.0 + B * R))) + 1.0


def theorem4_bound(lam: float, B: float, R: float, d: int, n: int,
                   theta_norm: float, eps: float) -> float:
    """Theorem-1 bound plus the 3nR(nR^2/(8 lam) + B) eps optimization-error term."""
    return (theorem1_bound(lam, B, R, d, n, theta_norm)
            + 3.0 * n * R * (n * R * R / (8.0 * lam) + B) * eps)


def loglog_slope(ns: list[int], regrets: list[float]) -> float:
    """OLS slope of log(regret) against log(n); non-positive points are dropped."""
    pts = [(n, r) for n, r in zip(ns, regrets) if r > 0]
    dropped = len(ns) - len(pts)
    if dropped:
        warnings.warn(f"excluded {dropped} non-positive regret point(s)")
    if len(pts) < 3:
        raise ValueError("need at least 3 positive points to fit a slope")
    lx = np.log([p[0] for p in pts])
    ly = np.log([p[1] for p in pts])
    return float(np.polyfit(lx, ly, 1)[0])


def make_learner(algo: str, dim: int, B: float, R: float, lam: float, n: int,
                 inner_steps: int | None = None, inner_tol: float | None = None):
    """Factory shared by the CLI, the service and the acceptance protocol."""
    if algo == "aioli":
        if inner_steps is None and inner_tol is None:
            inner_tol = forecaster.theorem3_tolerance(n, R, lam, B)
        cfg = forecaster.AioliConfig(dim=dim, lam=lam, B=B, R=R,
                                     inner_steps=inner_steps, inner_tol=inner_tol)
        return forecaster.AioliLearner(cfg)
    if algo == "ogd":
        return baselines.OgdLearner(dim, B, R)
    if algo == "ons":
        return baselines.OnsLearner(dim, B, R)
    if algo == "ftrl":
        return baselines.FtrlProperLearner(dim, lam)
    if algo == "zero":
        return baselines.ZeroLearner(dim)
    raise ValueError(f"unknown algorithm {algo!r}")


def worst_average_regret(algo: str, n: int, seeds: list[int], eps: float = 0.01,
                         lam: float | None = None, R: float = 1.0) -> float:
    """The adversarial-stream protocol: average the final regret over the given
    seeds for each chi in {-1, +1} and report the worse of the two averages.

    B = log(n); AIOLI uses lam = 1/B^2 unless overridden, proper FTRL uses
    lam = 1.
    """
    B = math.log(n)
    per_chi = []
    for chi in (-1, 1):
        finals = []
        for seed in seeds:
            spec = streams.StreamSpec(kind="adversarial", n=n, seed=seed,
                                      chi=chi, eps=eps)
            examples = streams.adversarial_stream(spec)
            if algo == "ftrl":
                run_lam = 1.0 if lam is None else lam
            else:
                run_lam = 1.0 / B ** 2 if lam is None else lam
            learner = make_learner(algo, 1, B, R, run_lam, n)
            finals.append(run_experiment(learner, examples, B).final_regret)
        per_chi.append(sum(finals) / len(finals))
    return max(per_chi)
