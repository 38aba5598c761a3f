"""Efficient improper online logistic regression with adaptive-curvature
surrogates, plus baselines, a regret harness and theoretical-bound checkers."""

from . import baselines, bench, forecaster, linalg, loss, streams, verify
from .forecaster import AioliConfig, AioliLearner, AioliState

__all__ = [
    "AioliConfig",
    "AioliLearner",
    "AioliState",
    "baselines",
    "bench",
    "forecaster",
    "linalg",
    "loss",
    "streams",
    "verify",
]

__version__ = "0.1.0"
