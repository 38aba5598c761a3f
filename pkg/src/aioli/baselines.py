"""Baseline learners: projected OGD, Online Newton Step, proper FTRL, and the
online-to-batch converter for the improper forecaster."""

from __future__ import annotations

import math

import numpy as np

from . import forecaster, loss


def project_ball(theta: np.ndarray, B: float) -> np.ndarray:
    """Euclidean projection onto the ball of radius B."""
    n = np.linalg.norm(theta)
    if n <= B:
        return theta
    return theta * (B / n)


def ogd_step(theta: np.ndarray, g: np.ndarray, t: int, B: float, R: float) -> np.ndarray:
    """One projected-gradient step with the B/(R sqrt(t)) schedule."""
    return project_ball(theta - (B / (R * math.sqrt(t))) * g, B)


def project_a_norm(z: np.ndarray, A: np.ndarray, B: float, tol: float = 1e-8,
                   max_iter: int = 1000) -> np.ndarray:
    """A-norm projection of z onto the B-ball by projected gradient descent.

    Minimizes (theta - z)' A (theta - z) over ||theta|| <= B; stops when the
    projected-gradient norm drops below ``tol``.
    """
    if np.linalg.norm(z) <= B:
        return z
    lam_max = float(np.linalg.eigvalsh(A)[-1])
    step = 1.0 / (2.0 * lam_max)
    theta = project_ball(z, B)
    for _ in range(max_iter):
        grad = 2.0 * (A @ (theta - z))
        nxt = project_ball(theta - step * grad, B)
        if np.linalg.norm(nxt - theta) / step <= tol:
            return nxt
        theta = nxt
    raise RuntimeError("A-norm projection did not converge")


def ftrl_proper_step(history: list[loss.Example], lam: float, theta0: np.ndarray | None = None,
                     grad_tol: float = 1e-10, max_iter: int = 100) -> np.ndarray:
    """Minimizer of the l2-regularized cumulative logistic loss (damped Newton).

    Unconstrained; the regularizer keeps the solution bounded. ``theta0``
    allows warm starts when re-solving round after round.
    """
    if not history:
        d = 1 if theta0 is None else theta0.shape[0]
        return np.zeros(d)
    X = np.stack([ex.x for ex in history])
    Y = np.array([ex.y for ex in history], dtype=float)
    d = X.shape[1]
    theta = np.zeros(d) if theta0 is None else np.array(theta0, dtype=float)

    def value(th):
        m = Y * (X @ th)
        return float(np.sum(np.logaddexp(0.0, -m))) + lam * float(np.dot(th, th))

    for _ in range(max_iter):
        z = X @ theta
        m = Y * z
        sig = 1.0 / (1.0 + np.exp(np.clip(m, -500, 500)))  # sigma(-m)
        grad = -(X.T @ (Y * sig)) + 2.0 * lam * theta
        if np.linalg.norm(grad) <= grad_tol:
            return theta
        w = sig * (1.0 - sig)
        H = (X.T * w) @ X + 2.0 * lam * np.eye(d)
        step = np.linalg.solve(H, grad)
        f0 = value(theta)
        alpha = 1.0
        while alpha > 1e-12 and value(theta - alpha * step) > f0 + 1e-12 * (1.0 + abs(f0)):
            alpha *= 0.5
        theta = theta - alpha * step
    raise RuntimeError("proper FTRL Newton did not converge")


def online_to_batch(snapshots: list[forecaster.AioliState], x: np.ndarray, tau: int) -> float:
    """Prediction of the round-tau frozen improper predictor on a new input.

    Re-solves the improper problem of snapshot tau with ``x`` in place of the
    round's own input; tau is 1-based.
    """
    if not 1 <= tau <= len(snapshots):
        raise ValueError(f"tau = {tau} out of range 1..{len(snapshots)}")
    _, y_hat = forecaster.predict(snapshots[tau - 1], x)
    return y_hat


class ZeroLearner:
    """Predicts 0 on every round; handy as a harness sanity check."""

    def __init__(self, dim: int):
        self.dim = dim

    def predict(self, x: np.ndarray) -> float:
        return 0.0

    def update(self, x: np.ndarray, y: int) -> None:
        pass


class OgdLearner:
    def __init__(self, dim: int, B: float, R: float):
        self.B = B
        self.R = R
        self.theta = np.zeros(dim)
        self.t = 0

    def predict(self, x: np.ndarray) -> float:
        return float(np.dot(self.theta, x))

    def update(self, x: np.ndarray, y: int) -> None:
        self.t += 1
        g = loss.logistic_grad(self.theta, loss.Example(np.asarray(x, float), y))
        self.theta = ogd_step(self.theta, g, self.t, self.B, self.R)


class OnsLearner:
    """Online Newton Step with the e^{-BR} exp-concavity constant.

    The loss is e^{-BR}-exp-concave on the feasible margins, hence
    gamma = min(1/(4RB), e^{-BR}) / 2; see the docs for the B-vs-BR slack
    relative to the usual O(d e^B log n) statement.
    """

    def __init__(self, dim: int, B: float, R: float, ons_alpha: float | None = None,
                 ons_eps: float = 1.0):
        if B <= 0 or R <= 0 or ons_eps <= 0:
            raise ValueError("B, R and ons_eps must be positive")
        self.B = B
        self.R = R
        alpha = math.exp(-B * R) if ons_alpha is None else ons_alpha
        self.gamma = 0.5 * min(1.0 / (4.0 * R * B), alpha)
        self.A = ons_eps * np.eye(dim)
        self.theta = np.zeros(dim)

    def predict(self, x: np.ndarray) -> float:
        return float(np.dot(self.theta, x))

    def update(self, x: np.ndarray, y: int) -> None:
        g = loss.logistic_grad(self.theta, loss.Example(np.asarray(x, float), y))
        if not np.any(g):
            return
        self.A = self.A + np.outer(g, g)
        z = self.theta - np.linalg.solve(self.A, g) / self.gamma
        self.theta = project_a_norm(z, self.A, self.B)


class FtrlProperLearner:
    """Proper FTRL: re-fits the regularized logistic minimizer every round.

    Keeps the history in growing flat buffers and warm-starts Newton at the
    previous round's solution, so each re-fit typically takes 1-3 iterations.
    """

    def __init__(self, dim: int, lam: float = 1.0):
        self.lam = lam
        self.dim = dim
        self.theta = np.zeros(dim)
        self._X = np.empty((64, dim))
        self._Y = np.empty(64)
        self._m = 0

    def predict(self, x: np.ndarray) -> float:
        return float(np.dot(self.theta, x))

    def _append(self, x: np.ndarray, y: int) -> None:
        if self._m == self._X.shape[0]:
            self._X = np.concatenate([self._X, np.empty_like(self._X)])
            self._Y = np.concatenate([self._Y, np.empty_like(self._Y)])
        self._X[self._m] = x
        self._Y[self._m] = y
        self._m += 1

    def update(self, x: np.ndarray, y: int) -> None:
        self._append(np.asarray(x, float), y)
        X, Y = self._X[: self._m], self._Y[: self._m]
        theta = self.theta
        eye2lam = 2.0 * self.lam * np.eye(self.dim)

        def value(th):
            m = Y * (X @ th)
            return float(np.sum(np.logaddexp(0.0, -m))) + self.lam * float(np.dot(th, th))

        for _ in range(100):
            m = Y * (X @ theta)
            sig = 1.0 / (1.0 + np.exp(np.clip(m, -500, 500)))
            grad = -(X.T @ (Y * sig)) + 2.0 * self.lam * theta
            if np.linalg.norm(grad) <= 1e-10:
                break
            w = sig * (1.0 - sig)
            H = (X.T * w) @ X + eye2lam
            step = np.linalg.solve(H, grad)
            f0 = value(theta)
            alpha = 1.0
            # tolerate round-off in the line search near the optimum
            while alpha > 1e-12 and value(theta - alpha * step) > f0 + 1e-12 * (1.0 + abs(f0)):
                alpha *= 0.5
            theta = theta - alpha * step
        else:
            raise RuntimeError("proper FTRL Newton did not converge")
        self.theta = theta
