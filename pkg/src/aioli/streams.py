"""Data streams: the 1-D adversarial distribution, a synthetic Gaussian-margin
task, and a plain-text file format (`y x_1 ... x_d` per line).

All randomness flows through a counter-based Philox generator keyed on the
spec's seed, so identical specs give bit-identical streams on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.random import Generator, Philox

from .loss import Example


@dataclass(frozen=True)
class StreamSpec:
    """Description of a data source.

    kind: 'adversarial' (1-D, two-point distribution), 'gaussian'
    (d-dimensional logistic-model stream) or 'file'.
    """

    kind: str
    n: int
    seed: int = 0
    # adversarial parameters
    chi: int = 1
    eps: float = 0.01
    B: float | None = None  # defaults to log(n)
    # gaussian parameters
    d: int = 1
    margin_scale: float = 1.0
    R: float = 1.0
    # file parameter
    path: str | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.kind == "adversarial":
            if self.chi not in (-1, 1):
                raise ValueError("chi must be -1 or +1")
            if not 0.0 < self.eps < 1.0:
                raise ValueError("eps must be in (0, 1)")
        elif self.kind == "gaussian":
            if self.d < 1:
                raise ValueError("d must be >= 1")
        elif self.kind == "file":
            if self.path is None:
                raise ValueError("file stream needs a path")
        else:
            raise ValueError(f"unknown stream kind {self.kind!r}")

    @property
    def effective_B(self) -> float:
        return math.log(self.n) if self.B is None else self.B


def _rng(seed: int) -> Generator:
    return Generator(Philox(np.random.SeedSequence(seed)))


def adversarial_stream(spec: StreamSpec) -> list[Example]:
    """The two-point distribution forcing polynomial regret on proper learners.

    Draws (1 - sqrt(eps)/(2B), +1) with probability sqrt(eps)/(2B) + chi eps/B
    and (sqrt(eps)/B, -1) otherwise. Both inputs lie in (0, 1], so R = 1.
    """
    if spec.kind != "adversarial":
        raise ValueError("spec.kind must be 'adversarial'")
    B = spec.effective_B
    p = math.sqrt(spec.eps) / (2.0 * B) + spec.chi * spec.eps / B
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"positive-label probability {p} outside [0, 1]")
    x_pos = 1.0 - math.sqrt(spec.eps) / (2.0 * B)
    x_neg = math.sqrt(spec.eps) / B
    draws = _rng(spec.seed).random(spec.n) < p
    return [Example(np.array([x_pos if hit else x_neg]), 1 if hit else -1)
            for hit in draws]


def gaussian_stream(spec: StreamSpec) -> list[Example]:
    """I.i.d. Gaussian inputs (clipped to the R-ball) with logistic labels.

    Labels follow P(y=1 | x) = sigmoid(theta*.x) for a hidden parameter of
    norm ``effective_B`` scaled by ``margin_scale``.
    """
    if spec.kind != "gaussian":
        raise ValueError("spec.kind must be 'gaussian'")
    rng = _rng(spec.seed)
    B = spec.effective_B
    direction = rng.normal(size=spec.d)
    theta_star = (B / np.linalg.norm(direction)) * direction
    X = rng.normal(size=(spec.n, spec.d)) * (spec.R / math.sqrt(spec.d))
    norms = np.linalg.norm(X, axis=1)
    over = norms > spec.R
    X[over] *= (spec.R / norms[over])[:, None]
    margins = spec.margin_scale * (X @ theta_star)
    probs = 1.0 / (1.0 + np.exp(-np.clip(margins, -500, 500)))
    labels = np.where(rng.random(spec.n) < probs, 1, -1)
    return [Example(X[i].copy(), int(labels[i])) for i in range(spec.n)]


def read_stream(path: str | Path) -> list[Example]:
    examples = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            y = int(float(parts[0]))
            if y not in (-1, 1):
                raise ValueError(f"{path}:{lineno}: label must be -1 or 1")
            examples.append(Example(np.array([float(p) for p in parts[1:]]), y))
    return examples


def write_stream(path: str | Path, examples: list[Example]) -> None:
    with open(path, "w", newline="\n") as fh:
        for ex in examples:
            coords = " ".join(f"{v:.17g}" for v in ex.x)
            fh.write(f"{ex.y} {coords}\n")


def make_stream(spec: StreamSpec) -> list[Example]:
    if spec.kind == "adversarial":
        return adversarial_stream(spec)
    if spec.kind == "gaussian":
        return gaussian_stream(spec)
    return read_stream(spec.path)[: spec.n]
