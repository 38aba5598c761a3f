"""Numeric certification of the proof machinery: lemma grids, identities and
fast-path-versus-oracle agreement. Used by the `verify` CLI command and the
service endpoint; the individual checks also back the acceptance tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.random import Generator, Philox

from . import forecaster, streams
from . import loss as loss_mod
from .loss import Example


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    min_slack: float


def _rng(seed: int) -> Generator:
    return Generator(Philox(np.random.SeedSequence(seed)))


def check_lemma4_grid(tol: float = -1e-12) -> CheckResult:
    worst = math.inf
    for C in (0.5, 1.0, 5.0, 20.0):
        for a in np.linspace(-C, C, 51):
            for b in np.linspace(-50.0, 50.0, 61):
                worst = min(worst, loss_mod.quad_lower_bound_gap(float(a), float(b), C))
    return CheckResult("lemma4_grid", worst >= tol, worst)


def check_lemma5_grid(tol: float = -1e-12) -> CheckResult:
    worst = math.inf
    for a in np.linspace(-30.0, 30.0, 101):
        for b in np.linspace(-30.0, 30.0, 101):
            worst = min(worst, loss_mod.independence_ineq_gap(float(a), float(b)))
    return CheckResult("lemma5_grid", worst >= tol, worst)


def check_surrogate_domination(curvature_fn: Callable | None = None,
                               tol: float = -1e-12) -> CheckResult:
    """The surrogate built at theta_hat must lower-bound the logistic loss on
    the feasible margin range |theta x| <= BR (1-D grid, B = R = 1)."""
    if curvature_fn is None:
        curvature_fn = loss_mod.curvature
    B = R = 1.0
    worst = math.inf
    x = np.array([1.0])
    for y in (-1, 1):
        ex = Example(x, y)
        for th_hat in np.linspace(-10.0, 10.0, 41):
            theta_hat = np.array([th_hat])
            g = loss_mod.logistic_grad(theta_hat, ex)
            eta = curvature_fn(th_hat, y, B, R)
            coeffs = loss_mod.SurrogateCoeffs(
                g=g, eta=eta, theta_hat=theta_hat,
                loss_at_theta_hat=loss_mod.logistic_loss(th_hat, y))
            for th in np.linspace(-B, B, 41):
                slack = (loss_mod.logistic_loss(th, y)
                         - loss_mod.surrogate_eval(coeffs, np.array([th])))
                worst = min(worst, slack)
    return CheckResult("lemma4_surrogate_domination", worst >= tol, worst)


def check_gradient_identity(curvature_fn: Callable | None = None,
                            n: int = 1000, rel_tol: float = 1e-12,
                            seed: int = 7) -> CheckResult:
    """g^{-y} = -(1+BR) eta g, exactly up to round-off."""
    if curvature_fn is None:
        curvature_fn = loss_mod.curvature
    rng = _rng(seed)
    worst = math.inf
    for _ in range(n):
        d = int(rng.integers(1, 6))
        theta = rng.normal(size=d)
        x = rng.normal(size=d)
        y = 1 if rng.random() < 0.5 else -1
        B = float(rng.uniform(0.5, 5.0))
        R = float(rng.uniform(0.5, 5.0))
        g = loss_mod.logistic_grad(theta, Example(x, y))
        g_flip = loss_mod.logistic_grad(theta, Example(x, -y))
        eta = curvature_fn(float(np.dot(theta, x)), y, B, R)
        lhs = g_flip
        rhs = -(1.0 + B * R) * eta * g
        err = np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), 1e-300)
        worst = min(worst, rel_tol - err)
    return CheckResult("gradient_identity", worst >= 0.0, worst)


def _synthetic_run(n: int, d: int, seed: int):
    """Run AIOLI on a Gaussian stream, returning per-round (eta, g) and state."""
    spec = streams.StreamSpec(kind="gaussian", n=n, seed=seed, d=d, B=2.0, R=1.0)
    examples = streams.gaussian_stream(spec)
    cfg = forecaster.AioliConfig(dim=d, lam=1.0, B=2.0, R=1.0, inner_tol=1e-10)
    state = forecaster.init(cfg)
    etas, gs = [], []
    for ex in examples:
        theta_hat, y_hat = forecaster.predict(state, ex.x)
        g = loss_mod.logistic_grad(theta_hat, ex)
        etas.append(loss_mod.curvature(y_hat, ex.y, cfg.B, cfg.R))
        gs.append(g)
        state = forecaster.update(state, ex.x, ex.y, theta_hat, y_hat)
    return cfg, etas, gs


def check_telescoping(n: int = 200, d: int = 3, tol: float = -1e-8,
                      seed: int = 3) -> CheckResult:
    """sum_t (eta_t/2) g_t' A_t^-1 g_t <= sum_k log(1 + lambda_k(C_n)/lam)."""
    cfg, etas, gs = _synthetic_run(n, d, seed)
    lam = cfg.lam
    A = lam * np.eye(d)
    lhs = 0.0
    C = np.zeros((d, d))
    for eta, g in zip(etas, gs):
        A = A + 0.5 * eta * np.outer(g, g)
        C = C + 0.5 * eta * np.outer(g, g)
        lhs += 0.5 * eta * float(g @ np.linalg.solve(A, g))
    eigs = np.linalg.eigvalsh(C)
    rhs = float(np.sum(np.log1p(np.maximum(eigs, 0.0) / lam)))
    slack = rhs - lhs
    return CheckResult("lemma7_telescoping", slack >= tol, slack)


def check_det_identity(trials: int = 50, tol: float = 1e-8, seed: int = 11) -> CheckResult:
    """u' V^-1 u = 1 - det(V - u u')/det(V) for invertible V with V - uu' > 0."""
    rng = _rng(seed)
    worst = math.inf
    for _ in range(trials):
        d = int(rng.integers(2, 6))
        G = rng.normal(size=(d, d))
        V = G @ G.T + d * np.eye(d)
        u = rng.normal(size=d)
        u *= 0.5 / max(np.linalg.norm(u), 1e-12)  # keep V - uu' positive definite
        lhs = float(u @ np.linalg.solve(V, u))
        rhs = 1.0 - np.linalg.det(V - np.outer(u, u)) / np.linalg.det(V)
        worst = min(worst, tol - abs(lhs - rhs))
    return CheckResult("lemma6_det_identity", worst >= 0.0, worst)


def check_oracle_equivalence(n: int = 100, d: int = 2, tol: float = 1e-6,
                             seed: int = 5, lam: float = 0.002) -> CheckResult:
    """Fast-path predictions agree with the full-dimensional Newton oracle.

    The inner tolerance follows the horizon-based schedule, whose guarantee in
    parameter space is eps/sqrt(lam) = 1/(3n(nR^2/(8 lam)+B)); lam is chosen
    so that this sits below the 1e-6 agreement target.
    """
    spec = streams.StreamSpec(kind="gaussian", n=n, seed=seed, d=d, B=2.0, R=1.0)
    examples = streams.gaussian_stream(spec)
    inner_tol = forecaster.theorem3_tolerance(n, 1.0, lam, 2.0)
    cfg = forecaster.AioliConfig(dim=d, lam=lam, B=2.0, R=1.0, inner_tol=inner_tol)
    state = forecaster.init(cfg)
    worst = math.inf
    for ex in examples:
        theta_hat, y_hat = forecaster.predict(state, ex.x)
        theta_exact = forecaster.exact_solve(state, ex.x)
        worst = min(worst, tol - float(np.linalg.norm(theta_hat - theta_exact)))
        state = forecaster.update(state, ex.x, ex.y, theta_hat, y_hat)
    return CheckResult("oracle_equivalence", worst >= 0.0, worst)


def run_all(curvature_fn: Callable | None = None) -> list[CheckResult]:
    return [
        check_lemma4_grid(),
        check_lemma5_grid(),
        check_surrogate_domination(curvature_fn),
        check_gradient_identity(curvature_fn),
        check_telescoping(),
        check_det_identity(),
        check_oracle_equivalence(),
    ]
