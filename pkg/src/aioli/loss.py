"""Logistic loss, gradients, adaptive curvature and quadratic surrogates.

All exponentials go through branch-stable forms (branch point at |arg| = 30)
so that margins far beyond +-BR stay representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CURVATURE_FLOOR = 1e-300
_BRANCH = 30.0


@dataclass(frozen=True)
class Example:
    """One round's observation: feature vector ``x`` and label ``y`` in {-1,+1}."""

    x: np.ndarray
    y: int

    def __post_init__(self):
        if self.y not in (-1, 1):
            raise ValueError(f"label must be -1 or +1, got {self.y}")


@dataclass(frozen=True)
class SurrogateCoeffs:
    """Coefficients of one quadratic surrogate: gradient, curvature, expansion
    point and the loss value there."""

    g: np.ndarray
    eta: float
    theta_hat: np.ndarray
    loss_at_theta_hat: float


def logistic_loss(z: float, y: int) -> float:
    """log(1 + exp(-y z)), overflow-safe on both tails."""
    m = y * z
    if m < -_BRANCH:
        return -m + math.log1p(math.exp(m))
    return math.log1p(math.exp(-m))


def inv_one_plus_exp(t: float) -> float:
    """1 / (1 + exp(t)) without overflow."""
    if t > _BRANCH:
        e = math.exp(-t)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(t))


def logistic_grad(theta: np.ndarray, ex: Example) -> np.ndarray:
    """Gradient of the logistic loss at ``theta``: -y x / (1 + exp(y theta.x))."""
    z = float(np.dot(theta, ex.x))
    return (-ex.y * inv_one_plus_exp(ex.y * z)) * ex.x


def curvature(y_hat: float, y: int, B: float, R: float) -> float:
    """Adaptive curvature exp(y * y_hat) / (1 + B R), floored at 1e-300."""
    if B <= 0 or R <= 0:
        raise ValueError("B and R must be positive")
    a = min(y * y_hat, 700.0)
    return max(math.exp(a) / (1.0 + B * R), CURVATURE_FLOOR)


def surrogate_coeffs(theta_hat: np.ndarray, ex: Example, B: float, R: float) -> SurrogateCoeffs:
    """Build the quadratic surrogate of the logistic loss expanded at ``theta_hat``."""
    y_hat = float(np.dot(theta_hat, ex.x))
    return SurrogateCoeffs(
        g=logistic_grad(theta_hat, ex),
        eta=curvature(y_hat, ex.y, B, R),
        theta_hat=np.array(theta_hat, dtype=float),
        loss_at_theta_hat=logistic_loss(y_hat, ex.y),
    )


def surrogate_eval(coeffs: SurrogateCoeffs, theta: np.ndarray) -> float:
    """Evaluate the quadratic surrogate at ``theta``; exact at the expansion point."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != coeffs.theta_hat.shape:
        raise ValueError("dimension mismatch")
    slope = float(np.dot(coeffs.g, theta - coeffs.theta_hat))
    return coeffs.loss_at_theta_hat + slope + 0.5 * coeffs.eta * slope * slope


def quad_lower_bound_gap(a: float, b: float, C: float) -> float:
    """Slack of the curvature-aware quadratic lower bound on f(x)=log(1+e^-x).

    Returns f(a) - [f(b) + f'(b)(a-b) + e^b/(2(1+C)) f'(b)^2 (a-b)^2], which
    is nonnegative (up to round-off) whenever |a| <= C.
    """
    if abs(a) > C * (1.0 + 1e-12) + 1e-12:
        raise ValueError(f"|a| = {abs(a)} exceeds C = {C}")
    fa = logistic_loss(a, 1)
    fb = logistic_loss(b, 1)
    fpb = -inv_one_plus_exp(b)
    # e^b f'(b)^2 = sigma(b) sigma(-b), stable on both tails
    ebfp2 = inv_one_plus_exp(b) * inv_one_plus_exp(-b)
    rhs = fb + fpb * (a - b) + ebfp2 / (2.0 * (1.0 + C)) * (a - b) ** 2
    return fa - rhs


def _expm1_over(x: float) -> float:
    # (e^x - 1)/x with the convention value 1 at x = 0
    if x == 0.0:
        return 1.0
    return math.expm1(x) / x


def independence_ineq_gap(a: float, b: float) -> float:
    """Slack of ((e^{a-b}-1)/(a-b)) ((1+e^b)/(1+e^a)) >= 1/(1+|a|).

    Uses the symmetric rewriting of the left-hand side so both exponentials
    stay moderate for a, b in [-30, 30].
    """
    h = inv_one_plus_exp(a) * _expm1_over(a - b) + inv_one_plus_exp(-a) * _expm1_over(b - a)
    return h - 1.0 / (1.0 + abs(a))
