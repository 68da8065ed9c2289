"""Localization ball and noise-variance bound from paired differences."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfidence, NoiseBoundUndefined
from .sampler import SampleSet

RN_STATEMENT = "statement"  # R_n = D / (K - 2)
RN_PROOF = "proof"  # R_n = D / (K - 3)


@dataclass(frozen=True)
class LocalizationBall:
    center: np.ndarray
    radius: float
    noise_bound: float
    statistic: float
    m: int

    @property
    def dim(self) -> int:
        return len(self.center)

    def contains_simplex(self, vertices, tol: float = 0.0) -> bool:
        d = np.linalg.norm(np.asarray(vertices) - self.center, axis=1)
        return bool(np.all(d <= self.radius + tol))

    def to_dict(self) -> dict:
        rn = self.noise_bound
        return {
            "p": [float(v) for v in self.center],
            "R": float(self.radius),
            "R_n": None if math.isnan(rn) else float(rn),
            "D": float(self.statistic),
            "m": int(self.m),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LocalizationBall":
        rn = d.get("R_n")
        return cls(
            np.asarray(d["p"], dtype=float),
            float(d["R"]),
            math.nan if rn is None else float(rn),
            float(d["D"]),
            int(d["m"]),
        )


def radius_from_statistic(D: float, K: int) -> float:
    return 8.0 * math.sqrt((K + 1) * (K + 2) * D)


def localize(samples: SampleSet, variant: str = RN_STATEMENT) -> LocalizationBall:
    """Center p = sample mean, D = (1/2m) sum_i ||y_2i - y_2i-1||^2 over consecutive pairs.

    Raises NoiseBoundUndefined (with the ball attached) when the R_n
    denominator is nonpositive.
    """
    y = samples.points
    n, K = y.shape
    if n < 2:
        raise ValueError("localization needs at least two samples")
    m = n // 2
    p = y.mean(axis=0)
    diffs = y[1 : 2 * m : 2] - y[0 : 2 * m : 2]
    D = float((diffs**2).sum() / (2 * m))
    denom = {RN_STATEMENT: K - 2, RN_PROOF: K - 3}[variant]
    R = radius_from_statistic(D, K)
    if denom <= 0:
        ball = LocalizationBall(p, R, math.nan, D, m)
        raise NoiseBoundUndefined(f"R_n = D/{denom} is undefined for K = {K}", ball=ball)
    return LocalizationBall(p, R, D / denom, D, m)


def min_samples_localize(K: int, delta: float) -> int:
    """m = ceil(1000 (K+1)(K+2) ln(6/delta)); callers need 2m samples."""
    if not 0 < delta < 1:
        raise InvalidConfidence(f"delta must lie in (0, 1), got {delta}")
    return math.ceil(1000 * (K + 1) * (K + 2) * math.log(6.0 / delta))
