"""Distances between simplex densities and between noisy models.

Two uniform densities f_1 = 1/V_1 on S_1 and f_2 = 1/V_2 on S_2 with
intersection volume I and V_1 <= V_2 give

    (1/2) int |f_1 - f_2|
        = (1/2) [ (V_1 - I)/V_1 + (V_2 - I)/V_2 + I (1/V_1 - 1/V_2) ]
        = 1 - I / V_2,

so TV = 1 - I / max(V_1, V_2). Squaring the pointwise difference over the
same three regions gives the l2 expression used by :func:`l2_uniform`. The
only random quantity is I, estimated as V_small times the fraction of
uniform draws from the smaller simplex that land inside the other one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .density import make_quadrature, model_density, sample_quadrature_model
from .errors import DimMismatch, UnsupportedNoiseless
from .geometry import Simplex, check_nondegenerate, contains, volume
from .rng import derive_seed, make_rng
from .sampler import NoisyModel, uniform_points

KL_RATIO_CLAMP = (1e-300, 1e300)


@dataclass(frozen=True)
class DistanceEstimate:
    value: float
    std_error: float
    mc_samples: int
    seed: int


@dataclass(frozen=True)
class VertexAssignment:
    permutation: tuple
    cost: float


def _check_pair(s1: Simplex, s2: Simplex) -> None:
    if s1.dim != s2.dim:
        raise DimMismatch(f"dimensions differ: {s1.dim} vs {s2.dim}")
    check_nondegenerate(s1)
    check_nondegenerate(s2)


def intersection_volume(s1: Simplex, s2: Simplex, mc: int, seed: int):
    """Monte-Carlo estimate of Vol(S1 n S2) and its standard error.

    Draws come from the smaller-volume simplex.
    """
    _check_pair(s1, s2)
    v1, v2 = volume(s1), volume(s2)
    small, other, v_small = (s1, s2, v1) if v1 <= v2 else (s2, s1, v2)
    pts = uniform_points(small, mc, seed)
    p = float(np.mean(contains(other, pts)))
    return v_small * p, v_small * math.sqrt(p * (1.0 - p) / mc), v1, v2


def tv_uniform(s1: Simplex, s2: Simplex, mc: int = 100_000, seed: int = 0) -> DistanceEstimate:
    inter, se, v1, v2 = intersection_volume(s1, s2, mc, seed)
    vmax = max(v1, v2)
    return DistanceEstimate(1.0 - inter / vmax, se / vmax, mc, seed)


def l2_uniform(s1: Simplex, s2: Simplex, mc: int = 100_000, seed: int = 0) -> DistanceEstimate:
    inter, se, v1, v2 = intersection_volume(s1, s2, mc, seed)
    sq = (v1 - inter) / v1**2 + (v2 - inter) / v2**2 + inter * (1.0 / v1 - 1.0 / v2) ** 2
    value = math.sqrt(max(sq, 0.0))
    # d(value^2)/dI = -2 / (V1 V2); delta method, with a sqrt fallback near zero
    slope_se = 2.0 * se / (v1 * v2)
    if value > 0 and value * value > slope_se:
        err = slope_se / (2.0 * value)
    else:
        err = math.sqrt(slope_se)
    return DistanceEstimate(value, err, mc, seed)


def assignment_cost(s1: Simplex, s2: Simplex, perm) -> float:
    """sum_i ||v_i - w_perm(i)||_1, correctly rounded.

    Each |a - b| is expanded to the signed coordinates +-a, -+b and summed with
    fsum, so bijections tied in exact arithmetic (common under l1) get
    bit-identical costs.
    """
    a = s1.vertices
    b = s2.vertices[list(perm)]
    sgn = np.where(a >= b, 1.0, -1.0)
    return math.fsum(np.concatenate([(sgn * a).ravel(), (-sgn * b).ravel()]))


def vertex_l1(s1: Simplex, s2: Simplex) -> VertexAssignment:
    """Minimum over vertex bijections of the summed l1 vertex distances."""
    if s1.dim != s2.dim:
        raise DimMismatch(f"dimensions differ: {s1.dim} vs {s2.dim}")
    C = np.abs(s1.vertices[:, None, :] - s2.vertices[None, :, :]).sum(axis=-1)
    rows, cols = linear_sum_assignment(C)
    perm = tuple(int(c) for c in cols[np.argsort(rows)])
    return VertexAssignment(perm, assignment_cost(s1, s2, perm))


def vertex_l1_bruteforce(s1: Simplex, s2: Simplex) -> VertexAssignment:
    """Exhaustive (K+1)! search; for cross-checking :func:`vertex_l1` at small K."""
    best, best_perm = math.inf, None
    for perm in itertools.permutations(range(s1.dim + 1)):
        cost = assignment_cost(s1, s2, perm)
        if cost < best:
            best, best_perm = cost, perm
    return VertexAssignment(tuple(best_perm), float(best))


def _shared_quadrature(m1: NoisyModel, m2: NoisyModel, quad: int, seed: int):
    if m1.dim != m2.dim:
        raise DimMismatch(f"dimensions differ: {m1.dim} vs {m2.dim}")
    return make_quadrature(m1.dim, quad, derive_seed(seed, "quad"))


def tv_noisy_mc(
    m1: NoisyModel, m2: NoisyModel, mc: int = 20_000, quad: int = 4_000, seed: int = 0
) -> DistanceEstimate:
    """TV between the two quadrature densities, by importance sampling from their mixture.

    With h = (f1 + f2) / 2 as proposal, TV = (1/2) E_h |f1 - f2| / h, and the
    summand lies in [0, 2], so the estimator has bounded variance.
    """
    if mc < 1000 or quad < 1000:
        raise ValueError("mc and quad must be >= 1000")
    q = _shared_quadrature(m1, m2, quad, seed)
    n1 = int(make_rng(seed, "split").binomial(mc, 0.5))
    x = np.vstack(
        [
            sample_quadrature_model(m1, q, n1, derive_seed(seed, "draw", 1)),
            sample_quadrature_model(m2, q, mc - n1, derive_seed(seed, "draw", 2)),
        ]
    )
    f1 = model_density(m1, x, q)
    f2 = model_density(m2, x, q)
    h = 0.5 * (f1 + f2)
    terms = np.where(h > 0, 0.5 * np.abs(f1 - f2) / np.where(h > 0, h, 1.0), 0.0)
    return DistanceEstimate(float(terms.mean()), float(terms.std(ddof=1) / math.sqrt(mc)), mc, seed)


def kl_noisy_mc(
    m1: NoisyModel, m2: NoisyModel, mc: int = 20_000, quad: int = 4_000, seed: int = 0
) -> DistanceEstimate:
    """KL(f1 || f2) between quadrature densities, sampling x ~ f1.

    Density ratios are clamped to [1e-300, 1e300] before the log, which
    biases the estimate only when f2 underflows where f1 does not.
    """
    if m2.sigma == 0:
        raise UnsupportedNoiseless("KL to a noiseless model is infinite or undefined")
    q = _shared_quadrature(m1, m2, quad, seed)
    x = sample_quadrature_model(m1, q, mc, derive_seed(seed, "draw", 1))
    f1 = model_density(m1, x, q)
    f2 = model_density(m2, x, q)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.clip(f1 / f2, *KL_RATIO_CLAMP)
    ratio = np.where(np.isnan(ratio), 1.0, ratio)
    terms = np.log(ratio)
    return DistanceEstimate(float(terms.mean()), float(terms.std(ddof=1) / math.sqrt(mc)), mc, seed)


def smoothed_l2_sq_mc(s1: Simplex, s2: Simplex, sigma: float, mc: int, seed: int):
    """Estimate of ||(f1 - f2) * G_sigma||_2^2 and its standard error.

    Uses ||(f1 - f2) * G||^2 = E11 + E22 - 2 E12 with
    E_ab = E[G_{sqrt(2) sigma}(X_a - Y_b)], X_a ~ f_a and Y_b ~ f_b
    independent. The same underlying draws are reused for every sigma.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    K = s1.dim
    x1 = uniform_points(s1, mc, derive_seed(seed, "x", 1))
    y1 = uniform_points(s1, mc, derive_seed(seed, "y", 1))
    x2 = uniform_points(s2, mc, derive_seed(seed, "x", 2))
    y2 = uniform_points(s2, mc, derive_seed(seed, "y", 2))
    tau2 = 2.0 * sigma * sigma
    norm = (2.0 * math.pi * tau2) ** (-K / 2.0)

    def kern(a, b):
        return norm * np.exp(-((a - b) ** 2).sum(axis=1) / (2.0 * tau2))

    # one summand per draw index keeps the three terms paired for the variance
    terms = kern(x1, y1) + kern(x2, y2) - kern(x1, y2) - kern(x2, y1)
    return float(terms.mean()), float(terms.std(ddof=1) / math.sqrt(mc))
