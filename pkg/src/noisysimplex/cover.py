"""Quantization of the localization ball into a finite candidate family.

Cover points are drawn uniformly from the solid ball C(p, R). The number of
draws needed for an eps-cover, (1 + base R / eps)^(2K), explodes beyond
K = 2, so every enumeration here is budgeted and reports whether a budget,
rather than the theoretical count, decided its size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyFamily, InsufficientCover, InvalidConfig
from .geometry import Simplex, geometry_summary, is_degenerate
from .localization import LocalizationBall
from .rng import make_rng

APPENDIX_BASE = 4.0  # (1 + 4R/eps)^(2K)
SECTION_BASE = 2.0  # (1 + 2R/eps)^(2K)
_FULL_ENUMERATION_LIMIT = 2_000_000


@dataclass(frozen=True)
class CoverSpec:
    epsilon: float
    alpha: float
    point_budget: int = 5000
    tuple_budget: int = 200_000
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise InvalidConfig(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not self.alpha > 0:
            raise InvalidConfig(f"alpha must be positive, got {self.alpha}")
        if self.point_budget < 1 or self.tuple_budget < 1:
            raise InvalidConfig("budgets must be >= 1")


def vertex_resolution(spec: CoverSpec, K: int) -> float:
    """Cover radius alpha * eps / (K + 1) that makes snapped vertices eps-representative."""
    return spec.alpha * spec.epsilon / (K + 1)


def lemma_alpha(volume: float, K: int, theta_hi: float) -> float:
    """Largest admissible alpha = Vol^(1/K) / (5 (K+1) theta_hi)."""
    return volume ** (1.0 / K) / (5.0 * (K + 1) * theta_hi)


@dataclass
class CoverPoints:
    points: np.ndarray
    target_count: float
    truncated: bool


@dataclass
class CandidateFamily:
    hypotheses: list = field(default_factory=list)  # (Simplex, sigma) pairs
    cover_points_used: int = 0
    truncated: bool = False

    @property
    def M(self) -> int:
        return len(self.hypotheses)

    def extend(self, other: "CandidateFamily") -> "CandidateFamily":
        return CandidateFamily(
            self.hypotheses + other.hypotheses,
            self.cover_points_used + other.cover_points_used,
            self.truncated or other.truncated,
        )

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "cover_points_used": self.cover_points_used,
            "truncated": self.truncated,
            "hypotheses": [{"simplex": s.to_dict(), "sigma": float(sig)} for s, sig in self.hypotheses],
        }


def cover_target_count(R: float, eps_cov: float, K: int, base: float = APPENDIX_BASE) -> float:
    return (1.0 + base * R / eps_cov) ** (2 * K)


def _uniform_in_ball(rng, count: int, center, radius: float) -> np.ndarray:
    K = len(center)
    g = rng.standard_normal((count, K))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / K)
    return np.asarray(center) + g * r[:, None]


def cover_sphere(
    ball: LocalizationBall, eps_cov: float, spec: CoverSpec, base: float = APPENDIX_BASE
) -> CoverPoints:
    """Random eps_cov-cover of the solid ball, capped at ``spec.point_budget`` points."""
    if not eps_cov > 0:
        raise ValueError("eps_cov must be positive")
    K = ball.dim
    if eps_cov >= ball.radius:
        # every point of the ball is within R <= eps_cov of the center
        return CoverPoints(ball.center[None, :].copy(), 1.0, False)
    target = cover_target_count(ball.radius, eps_cov, K, base)
    count = int(min(math.ceil(target), spec.point_budget))
    rng = make_rng(spec.seed, "cover")
    pts = _uniform_in_ball(rng, count, ball.center, ball.radius)
    return CoverPoints(pts, target, target > spec.point_budget)


def cover_local(
    ball: LocalizationBall,
    eps_cov: float,
    centers: np.ndarray,
    radius: float,
    spec: CoverSpec,
    base: float = APPENDIX_BASE,
) -> list:
    """The part of a uniform ball cover that falls near each of ``centers``.

    Points are uniform in B(c, radius) intersected with the ball, at the
    density the full cover would have, capped at point_budget // len(centers)
    per neighborhood. Returns one CoverPoints per center.
    """
    K = ball.dim
    centers = np.atleast_2d(centers)
    target = cover_target_count(ball.radius, eps_cov, K, base)
    frac = min(1.0, (radius / ball.radius) ** K) if ball.radius > 0 else 1.0
    local_target = target * frac
    cap = max(1, spec.point_budget // len(centers))
    count = int(min(math.ceil(local_target), cap))
    out = []
    for i, c in enumerate(centers):
        rng = make_rng(spec.seed, "cover-local", i)
        pts = np.empty((0, K))
        tries = 0
        while len(pts) < count and tries < 50:
            cand = _uniform_in_ball(rng, 2 * count, c, radius)
            keep = np.linalg.norm(cand - ball.center, axis=1) <= ball.radius
            pts = np.vstack([pts, cand[keep]])
            tries += 1
        out.append(CoverPoints(pts[:count], local_target, local_target > cap))
    return out


def noise_grid(R_n: float, epsilon: float, K: int) -> list:
    """0, eps/sqrt(K), 2 eps/sqrt(K), ... up to the first value >= sqrt(R_n)."""
    if R_n < 0 or not epsilon > 0:
        raise ValueError("need R_n >= 0 and epsilon > 0")
    top = math.sqrt(R_n)
    step = epsilon / math.sqrt(K)
    grid = [0.0]
    i = 0
    while grid[-1] < top:
        i += 1
        grid.append(i * step)
    return grid


def passes_filters(s: Simplex, vol_floor: float, theta_lo: float, theta_hi: float) -> bool:
    if is_degenerate(s):
        return False
    g = geometry_summary(s)
    K = s.dim
    return (
        g.volume >= vol_floor
        and g.a_max <= theta_hi * g.volume ** ((K - 1) / K)
        and g.l_max <= theta_lo * K * g.volume ** (1.0 / K)
    )


def _choose_tuples(n_points: int, k: int, budget: int, rng):
    total = math.comb(n_points, k)
    if total <= budget:
        return list(combinations(range(n_points), k)), False
    if total <= _FULL_ENUMERATION_LIMIT:
        everything = list(combinations(range(n_points), k))
        pick = rng.choice(total, size=budget, replace=False)
        return sorted(everything[i] for i in pick), True
    chosen = set()
    while len(chosen) < budget:
        t = tuple(sorted(rng.choice(n_points, size=k, replace=False).tolist()))
        chosen.add(t)
    return sorted(chosen), True


def enumerate_candidates(
    points,
    ball: LocalizationBall,
    spec: CoverSpec,
    theta_lo: float,
    theta_hi: float,
    vol_floor: float,
    sigmas: Optional[Sequence[float]] = None,
    points_truncated: bool = False,
) -> CandidateFamily:
    """(K+1)-subsets of cover points as simplices, filtered, crossed with noise levels.

    ``sigmas`` defaults to the noise grid built from ``ball.noise_bound``.
    """
    if isinstance(points, CoverPoints):
        points_truncated = points_truncated or points.truncated
        points = points.points
    points = np.asarray(points, dtype=float)
    K = ball.dim
    if len(points) < K + 1:
        raise InsufficientCover(f"{len(points)} cover points cannot span a {K}-simplex")
    if sigmas is None:
        sigmas = noise_grid(ball.noise_bound, spec.epsilon, K)
    rng = make_rng(spec.seed, "tuples")
    tuples, tuples_truncated = _choose_tuples(len(points), K + 1, spec.tuple_budget, rng)
    hyps = []
    for t in tuples:
        verts = points[list(t)]
        if not ball.contains_simplex(verts, tol=1e-9 * max(1.0, ball.radius)):
            continue
        s = Simplex(verts)
        if passes_filters(s, vol_floor, theta_lo, theta_hi):
            hyps.extend((s, float(sig)) for sig in sigmas)
    if not hyps:
        raise EmptyFamily("no cover tuple survived the degeneracy / volume / isoperimetry filters")
    return CandidateFamily(hyps, len(points), points_truncated or tuples_truncated)


def family_size_bound(ball: LocalizationBall, epsilon: float, alpha: float, K: int) -> float:
    """log of (R_n sqrt(K) / eps) (1 + 2 (K+1) R / (alpha eps))^(K (K+1))."""
    return math.log(ball.noise_bound * math.sqrt(K) / epsilon) + K * (K + 1) * math.log1p(
        2.0 * (K + 1) * ball.radius / (alpha * epsilon)
    )
