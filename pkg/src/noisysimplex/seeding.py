"""Initial simplex guess used to center the budgeted candidate search.

The pipeline's candidate family only needs to contain one good hypothesis;
where the search is concentrated is left open. Here the successive
projection algorithm picks K+1 extreme data points, and a quadrature
log-likelihood fit over (V, sigma) then pulls those noisy extremes back
toward the true vertices. Nothing here carries a guarantee.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp
from scipy.stats import qmc

from .geometry import Simplex, barycentric, diameter
from .rng import derive_seed


@dataclass(frozen=True)
class SeedFit:
    simplex: Simplex
    sigma: float
    at_floor: bool
    spa: Simplex
    loglik: float


def qmc_simplex_weights(K: int, quad: int, seed: int) -> np.ndarray:
    """Scrambled Sobol points pushed onto the simplex by sorted-uniform spacings.

    The fit only needs an accurate integral over the simplex, and a
    low-discrepancy set gets there with far fewer nodes than random draws.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # balance warning for non powers of two
        u = qmc.Sobol(K, scramble=True, seed=seed).random(quad)
    u = np.sort(u, axis=1)
    edges = np.hstack([np.zeros((quad, 1)), u, np.ones((quad, 1))])
    return np.diff(edges, axis=1)


def enclosing_simplex(s: Simplex, y: np.ndarray) -> Simplex:
    """Move each facet of ``s`` outward, parallel to itself, until every row of ``y`` is inside.

    With m_i = min(0, min_n phi_i(y_n)), the region {phi_i >= m_i} is a simplex
    with barycentric vertices m + (1 - sum m) e_j.
    """
    m = np.minimum(barycentric(s, y).min(axis=0), 0.0)
    B = m[None, :] + (1.0 - m.sum()) * np.eye(len(m))
    return Simplex(B @ s.vertices)


def spa_vertices(y: np.ndarray) -> np.ndarray:
    """Successive projection on the lifted points [y, 1]; returns K+1 row indices."""
    y = np.asarray(y, dtype=float)
    n, K = y.shape
    r = np.hstack([y - y.mean(axis=0), np.ones((n, 1))])
    picked = []
    for _ in range(K + 1):
        norms = (r * r).sum(axis=1)
        j = int(np.argmax(norms))
        picked.append(j)
        u = r[j] / math.sqrt(norms[j])
        r = r - np.outer(r @ u, u)
    return np.array(picked)


def _negloglik(params, y, W, K):
    V = params[:-1].reshape(K + 1, K)
    log_s = params[-1]
    s2 = math.exp(2.0 * log_s)
    C = W @ V
    diff2 = (y * y).sum(1)[:, None] + (C * C).sum(1)[None, :] - 2.0 * y @ C.T
    np.maximum(diff2, 0.0, out=diff2)
    logk = -0.5 * diff2 / s2
    lse = logsumexp(logk, axis=1)
    n, q = logk.shape
    ll = lse - math.log(q) - K * log_s - 0.5 * K * math.log(2.0 * math.pi)
    r = np.exp(logk - lse[:, None])
    # dL/dC_j = sum_n r_nj (y_n - C_j) / s^2
    G = (r.T @ y - r.sum(0)[:, None] * C) / s2
    gV = W.T @ G
    gs = float((r * (diff2 / s2)).sum() - n * K)
    grad = np.concatenate([gV.ravel(), [gs]])
    return -ll.sum() / n, -grad / n


def fit_seed(
    y: np.ndarray,
    seed: int,
    fit_points: int = 600,
    quad: int = 512,
    floor_frac: float = 0.02,
    maxiter: int = 200,
) -> SeedFit:
    """SPA start refined by maximizing the quadrature likelihood.

    sigma is bounded below by ``floor_frac`` times the SPA diameter because a
    finite quadrature cannot resolve a sharper density; ``at_floor`` reports
    when the bound is active.
    """
    y = np.asarray(y, dtype=float)
    K = y.shape[1]
    spa = Simplex(y[spa_vertices(y)])
    fit = y[:fit_points]
    W = qmc_simplex_weights(K, quad, derive_seed(seed, "seed-quad"))
    floor = max(floor_frac * diameter(spa), 1e-12)
    s0 = max(floor, 0.1 * diameter(spa))
    x0 = np.concatenate([spa.vertices.ravel(), [math.log(s0)]])
    bounds = [(None, None)] * (K * (K + 1)) + [(math.log(floor), None)]
    res = minimize(
        _negloglik, x0, args=(fit, W, K), jac=True, method="L-BFGS-B",
        bounds=bounds, options={"maxiter": maxiter},
    )
    V = res.x[:-1].reshape(K + 1, K)
    sigma = math.exp(res.x[-1])
    at_floor = sigma <= floor * (1 + 1e-6)
    try:
        simplex = Simplex(V)
    except ValueError:
        simplex = spa
    return SeedFit(simplex, sigma, at_floor, spa, float(-res.fun))
