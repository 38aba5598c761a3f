"""The AIOLI forecaster.

Maintains the Cholesky factor L of A_{t-1} = lambda I + 1/2 sum eta_s g_s g_s^T
and the vector b_{t-1}, answers each round's improper prediction by reducing
the d-dimensional FTRL problem to a rank-p (p in {1,2}) strongly convex
problem solved by gradient descent, and updates the statistics in O(d^2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import linalg, loss

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, keep a fallback
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(f):
            return f

        return deco if not (args and callable(args[0])) else args[0]


@dataclass(frozen=True)
class AioliConfig:
    """Hyper-parameters of the forecaster.

    ``inner_steps`` fixes the number of inner gradient-descent iterations;
    when it is None, ``inner_tol`` drives termination (with the Lemma-3 step
    cap as a safety net).
    """

    dim: int
    lam: float
    B: float
    R: float
    inner_steps: int | None = None
    inner_tol: float | None = None
    rank_tol: float = linalg.DEFAULT_RANK_TOL

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.lam <= 0 or self.B <= 0 or self.R <= 0:
            raise ValueError("lam, B and R must be strictly positive")
        if self.inner_steps is not None and self.inner_steps < 1:
            raise ValueError("inner_steps must be >= 1")
        if self.inner_steps is None:
            if self.inner_tol is None or self.inner_tol <= 0:
                raise ValueError("inner_tol must be > 0 in tolerance mode")


@dataclass
class AioliState:
    """Sufficient statistics after t-1 completed rounds."""

    t: int
    L: np.ndarray
    b: np.ndarray
    config: AioliConfig

    def snapshot(self) -> "AioliState":
        """Read-only copy, safe to keep for online-to-batch conversion."""
        return AioliState(self.t, self.L.copy(), self.b.copy(), self.config)


@dataclass(frozen=True)
class SmallProblem:
    """The reduced p-dimensional inner problem.

    Minimize ||w||^2 - 2 u.w + log(1+e^{-v.w}) + log(1+e^{v.w}); ``backmap``
    (d x p) lifts the solution back to the whitened r-space. ``p == 0`` marks
    the degenerate case (b and x both numerically zero).
    """

    p: int
    u: np.ndarray
    v: np.ndarray
    backmap: np.ndarray


def init(config: AioliConfig) -> AioliState:
    L = math.sqrt(config.lam) * np.eye(config.dim)
    return AioliState(t=1, L=L, b=np.zeros(config.dim), config=config)


def reduce(state: AioliState, x: np.ndarray) -> SmallProblem:
    """Project the round-t objective onto span{L^-1 b, L^-1 x}."""
    x = np.asarray(x, dtype=float)
    cfg = state.config
    if x.shape != (cfg.dim,):
        raise ValueError(f"expected x of shape ({cfg.dim},), got {x.shape}")
    nx = np.linalg.norm(x)
    if nx > cfg.R * (1.0 + 1e-9):
        warnings.warn(f"||x|| = {nx} exceeds configured R = {cfg.R}")
    W = np.column_stack([linalg.solve_lower(state.L, state.b),
                         linalg.solve_lower(state.L, x)])
    pair = linalg.eig2_symmetric_psd(W.T @ W, cfg.rank_tol)
    if pair.p == 0:
        return SmallProblem(0, np.zeros(0), np.zeros(0), np.zeros((cfg.dim, 0)))
    s = np.sqrt(pair.sigma)
    u = s * pair.U[0, :]
    v = s * pair.U[1, :]
    backmap = (W @ pair.U) / s
    return SmallProblem(pair.p, u, v, backmap)


def inner_objective(prob: SmallProblem, omega: np.ndarray) -> float:
    omega = np.asarray(omega, dtype=float)
    if omega.shape != prob.u.shape:
        raise ValueError("dimension mismatch")
    s = float(np.dot(prob.v, omega))
    quad = float(np.dot(omega, omega) - 2.0 * np.dot(prob.u, omega))
    return quad + loss.logistic_loss(s, 1) + loss.logistic_loss(s, -1)


def inner_gradient(prob: SmallProblem, omega: np.ndarray) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    if omega.shape != prob.u.shape:
        raise ValueError("dimension mismatch")
    s = float(np.dot(prob.v, omega))
    return 2.0 * omega - 2.0 * prob.u + math.tanh(0.5 * s) * prob.v


@njit(cache=True)
def _gd_kernel(u1, u2, v1, v2, gamma, max_steps, grad_tol):  # pragma: no cover - jitted
    w1 = 0.0
    w2 = 0.0
    for _ in range(max_steps):
        s = v1 * w1 + v2 * w2
        th = math.tanh(0.5 * s)
        g1 = 2.0 * w1 - 2.0 * u1 + th * v1
        g2 = 2.0 * w2 - 2.0 * u2 + th * v2
        if grad_tol > 0.0 and g1 * g1 + g2 * g2 <= grad_tol * grad_tol:
            break
        w1 -= gamma * g1
        w2 -= gamma * g2
    return w1, w2


def _gd_python(u1, u2, v1, v2, gamma, max_steps, grad_tol):
    w1 = 0.0
    w2 = 0.0
    for _ in range(max_steps):
        s = v1 * w1 + v2 * w2
        th = math.tanh(0.5 * s)
        g1 = 2.0 * w1 - 2.0 * u1 + th * v1
        g2 = 2.0 * w2 - 2.0 * u2 + th * v2
        if grad_tol > 0.0 and g1 * g1 + g2 * g2 <= grad_tol * grad_tol:
            break
        w1 -= gamma * g1
        w2 -= gamma * g2
    return w1, w2


_gd = _gd_kernel if _HAVE_NUMBA else _gd_python


if _HAVE_NUMBA:
    # Fused per-round kernels. These replicate reduce + solve_inner + the
    # back-substitution (and the statistics update) in single jitted calls so
    # the O(d^2) substitutions dominate the round cost instead of interpreter
    # overhead; the pure-numpy functions above remain the reference path and
    # the tests pin the two against each other.
    from .linalg import _back_solve_t, _cholupdate_inplace, _forward_solve

    @njit(cache=True)
    def _predict_kernel(L, b, x, gamma, max_steps, grad_tol, rank_tol):  # pragma: no cover
        d = x.shape[0]
        r1 = _forward_solve(L, b)
        r2 = _forward_solve(L, x)
        m11 = 0.0
        m12 = 0.0
        m22 = 0.0
        for i in range(d):
            m11 += r1[i] * r1[i]
            m12 += r1[i] * r2[i]
            m22 += r2[i] * r2[i]
        tr = m11 + m22
        disc = math.hypot(m11 - m22, 2.0 * m12)
        lam1 = 0.5 * (tr + disc)
        lam2 = 0.5 * (tr - disc)
        cutoff = rank_tol * max(1.0, tr)
        theta = np.zeros(d)
        if lam1 <= cutoff:
            return theta
        # top eigenvector of the 2x2 Gram matrix (better-conditioned column)
        a1, a2 = m12, lam1 - m11
        c1, c2 = lam1 - m22, m12
        if c1 * c1 + c2 * c2 > a1 * a1 + a2 * a2:
            a1, a2 = c1, c2
        nrm = math.sqrt(a1 * a1 + a2 * a2)
        if nrm == 0.0:
            a1, a2 = 1.0, 0.0
        else:
            a1 /= nrm
            a2 /= nrm
        s1 = math.sqrt(lam1)
        u1 = s1 * a1
        v1 = s1 * a2
        has2 = lam2 > cutoff
        if has2:
            s2 = math.sqrt(lam2)
            u2 = -s2 * a2
            v2 = s2 * a1
        else:
            s2 = 1.0
            u2 = 0.0
            v2 = 0.0
        w1 = 0.0
        w2 = 0.0
        for _ in range(max_steps):
            s = v1 * w1 + v2 * w2
            th = math.tanh(0.5 * s)
            g1 = 2.0 * w1 - 2.0 * u1 + th * v1
            g2 = 2.0 * w2 - 2.0 * u2 + th * v2
            if grad_tol > 0.0 and g1 * g1 + g2 * g2 <= grad_tol * grad_tol:
                break
            w1 -= gamma * g1
            w2 -= gamma * g2
        k1 = w1 / s1
        k2 = w2 / s2 if has2 else 0.0
        z = np.empty(d)
        for i in range(d):
            z[i] = (a1 * r1[i] + a2 * r2[i]) * k1 + (a1 * r2[i] - a2 * r1[i]) * k2
        return _back_solve_t(L, z)

    @njit(cache=True)
    def _update_kernel(L, b, x, y, theta_hat, y_hat, B, R):  # pragma: no cover
        d = x.shape[0]
        z = 0.0
        for i in range(d):
            z += theta_hat[i] * x[i]
        m = y * z
        if m > 30.0:
            e = math.exp(-m)
            sig = e / (1.0 + e)
        else:
            sig = 1.0 / (1.0 + math.exp(m))
        coef = -y * sig
        a = min(y * y_hat, 700.0)
        eta = max(math.exp(a) / (1.0 + B * R), 1e-300)
        g = coef * x
        gt = 0.0
        for i in range(d):
            gt += g[i] * theta_hat[i]
        _cholupdate_inplace(L, math.sqrt(0.5 * eta) * g)
        c = 0.5 * (eta * gt - 1.0)
        for i in range(d):
            b[i] += c * g[i]


def lemma3_steps(t: int, lam: float, R: float, eps: float) -> int:
    """Iteration count guaranteeing inner error <= eps at round t."""
    arg = R * t / (eps * math.sqrt(lam))
    if arg <= 1.0:
        return 1
    return max(1, math.ceil((4.0 + R * R / lam) * math.log(arg)))


def solve_inner(prob: SmallProblem, config: AioliConfig, t: int) -> np.ndarray:
    """Gradient descent on the reduced problem from omega = 0.

    Step size lambda/(4 lambda + R^2). Fixed-step mode runs exactly
    ``inner_steps`` iterations; tolerance mode stops once the gradient norm
    drops below 2 eps (2-strong convexity then gives ||w - w*|| <= eps), or
    at the Lemma-3 cap.
    """
    if prob.p == 0:
        return np.zeros(0)
    gamma = config.lam / (4.0 * config.lam + config.R ** 2)
    max_steps, grad_tol = _inner_budget(config, t)
    u1 = float(prob.u[0])
    v1 = float(prob.v[0])
    if prob.p == 2:
        u2, v2 = float(prob.u[1]), float(prob.v[1])
    else:
        u2 = v2 = 0.0
    w1, w2 = _gd(u1, u2, v1, v2, gamma, max_steps, grad_tol)
    return np.array([w1, w2])[: prob.p]


def _inner_budget(config: AioliConfig, t: int) -> tuple[int, float]:
    if config.inner_steps is not None:
        return config.inner_steps, 0.0
    eps = config.inner_tol
    return lemma3_steps(t, config.lam, config.R, eps), 2.0 * eps


def predict(state: AioliState, x: np.ndarray) -> tuple[np.ndarray, float]:
    """Return (theta_hat, y_hat) for the incoming input ``x``."""
    if not _HAVE_NUMBA:
        return predict_reference(state, x)
    cfg = state.config
    x = np.ascontiguousarray(x, dtype=float)
    if x.shape != (cfg.dim,):
        raise ValueError(f"expected x of shape ({cfg.dim},), got {x.shape}")
    nx = np.linalg.norm(x)
    if nx > cfg.R * (1.0 + 1e-9):
        warnings.warn(f"||x|| = {nx} exceeds configured R = {cfg.R}")
    gamma = cfg.lam / (4.0 * cfg.lam + cfg.R ** 2)
    max_steps, grad_tol = _inner_budget(cfg, state.t)
    theta = _predict_kernel(state.L, state.b, x, gamma, max_steps,
                            grad_tol, cfg.rank_tol)
    return theta, float(np.dot(theta, x))


def predict_reference(state: AioliState, x: np.ndarray) -> tuple[np.ndarray, float]:
    """Prediction through the explicit reduce / solve_inner / lift pipeline."""
    prob = reduce(state, x)
    if prob.p == 0:
        theta = np.zeros(state.config.dim)
        return theta, 0.0
    omega = solve_inner(prob, state.config, state.t)
    theta = linalg.solve_upper_transpose(state.L, prob.backmap @ omega)
    return theta, float(np.dot(theta, x))


def update(state: AioliState, x: np.ndarray, y: int, theta_hat: np.ndarray,
           y_hat: float) -> AioliState:
    """Fold the revealed label into (L, b) and advance the round counter."""
    if y not in (-1, 1):
        raise ValueError(f"label must be -1 or +1, got {y}")
    cfg = state.config
    if _HAVE_NUMBA:
        L = state.L.copy()
        b = state.b.copy()
        _update_kernel(L, b, np.ascontiguousarray(x, dtype=float), y,
                       np.ascontiguousarray(theta_hat, dtype=float),
                       float(y_hat), cfg.B, cfg.R)
        return AioliState(t=state.t + 1, L=L, b=b, config=cfg)
    ex = loss.Example(np.asarray(x, dtype=float), y)
    g = loss.logistic_grad(theta_hat, ex)
    eta = loss.curvature(y_hat, y, cfg.B, cfg.R)
    L = linalg.cholesky_rank1_update(state.L, math.sqrt(0.5 * eta) * g)
    b = state.b + 0.5 * (eta * float(np.dot(g, theta_hat)) - 1.0) * g
    return AioliState(t=state.t + 1, L=L, b=b, config=cfg)


def exact_solve(state: AioliState, x: np.ndarray, grad_tol: float = 1e-12,
                max_iter: int = 200) -> np.ndarray:
    """Damped-Newton oracle for the full d-dimensional round objective.

    Minimizes theta' A theta - 2 b.theta + log(1+e^{-theta.x}) + log(1+e^{theta.x})
    to gradient norm ``grad_tol``; the fast path must agree with this up to
    the inner-solver tolerance.
    """
    x = np.asarray(x, dtype=float)
    A = state.L @ state.L.T
    theta = np.zeros(state.config.dim)

    def value(th):
        z = float(np.dot(th, x))
        return (float(th @ A @ th) - 2.0 * float(np.dot(state.b, th))
                + loss.logistic_loss(z, 1) + loss.logistic_loss(z, -1))

    for _ in range(max_iter):
        z = float(np.dot(theta, x))
        th_half = math.tanh(0.5 * z)
        grad = 2.0 * (A @ theta) - 2.0 * state.b + th_half * x
        if np.linalg.norm(grad) <= grad_tol:
            return theta
        H = 2.0 * A + 0.5 * (1.0 - th_half * th_half) * np.outer(x, x)
        step = np.linalg.solve(H, grad)
        f0 = value(theta)
        alpha = 1.0
        # near the optimum value differences drop below float noise, so
        # accept steps that increase the objective by at most round-off
        while alpha > 1e-12 and value(theta - alpha * step) > f0 + 1e-12 * (1.0 + abs(f0)):
            alpha *= 0.5
        theta = theta - alpha * step
    raise RuntimeError("Newton did not converge on the round objective")


def theorem3_steps(n: int, R: float, lam: float, B: float) -> int:
    """Fixed inner iteration count preserving the regret bound up to +1."""
    if n < 1 or R <= 0 or lam <= 0 or B <= 0:
        raise ValueError("all inputs must be positive")
    arg = 3.0 * n * n * R * R / lam * (n * R * R / (8.0 * lam) + B)
    if arg <= 1.0:
        return 1
    return max(1, math.ceil((4.0 + R * R / lam) * math.log(arg)))


def theorem3_tolerance(n: int, R: float, lam: float, B: float) -> float:
    """Inner accuracy making the optimization-error term at most sqrt(lam)."""
    return math.sqrt(lam) / (3.0 * n * R * (n * R * R / (8.0 * lam) + B))


class AioliLearner:
    """Stateful predict/update wrapper used by the regret harness."""

    def __init__(self, config: AioliConfig):
        self.config = config
        self.state = init(config)
        self._theta_hat: np.ndarray | None = None
        self._y_hat = 0.0

    def predict(self, x: np.ndarray) -> float:
        self._theta_hat, self._y_hat = predict(self.state, x)
        return self._y_hat

    def update(self, x: np.ndarray, y: int) -> None:
        if self._theta_hat is None:
            raise RuntimeError("update called before predict")
        self.state = update(self.state, x, y, self._theta_hat, self._y_hat)
        self._theta_hat = None

    def snapshot(self) -> AioliState:
        return self.state.snapshot()
