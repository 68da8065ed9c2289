"""Numerical evaluation of the smoothed simplex density f_S * G_sigma.

The convolution integral is replaced by an equal-weight Gaussian mixture
whose centers are the images ``phi_j @ V`` of a frozen set of uniform
Dirichlet weights. A single :class:`QuadratureSet` can be shared by every
hypothesis of the same dimension; identical models then have bitwise
identical densities and translated models have exactly translated ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, UnsupportedNoiseless
from .geometry import contains, volume
from .sampler import NoisyModel, dirichlet_uniform
from .rng import make_rng

_BLOCK_ELEMENTS = 1 << 21


@dataclass(frozen=True)
class QuadratureSet:
    weights: np.ndarray  # (quad, K+1)
    seed: int

    @property
    def quad(self) -> int:
        return self.weights.shape[0]

    @property
    def k_plus_1(self) -> int:
        return self.weights.shape[1]


def make_quadrature(K: int, quad: int, seed: int) -> QuadratureSet:
    w = dirichlet_uniform(K + 1, quad, seed)
    w.setflags(write=False)
    return QuadratureSet(w, int(seed))


def mixture_density(centers: np.ndarray, sigma: float, x: np.ndarray) -> np.ndarray:
    """Mean of N(x; c_j, sigma^2 I) over the rows ``c_j`` of ``centers``."""
    x = np.atleast_2d(x)
    n, K = x.shape
    q = centers.shape[0]
    norm = (2.0 * math.pi * sigma * sigma) ** (-K / 2.0)
    c2 = (centers * centers).sum(axis=1)
    inv = -0.5 / (sigma * sigma)
    out = np.empty(n)
    step = max(1, _BLOCK_ELEMENTS // q)
    for a in range(0, n, step):
        xb = x[a : a + step]
        d2 = (xb * xb).sum(axis=1)[:, None] + c2[None, :] - 2.0 * (xb @ centers.T)
        np.maximum(d2, 0.0, out=d2)
        out[a : a + step] = np.exp(d2 * inv).mean(axis=1)
    return out * norm


def noisy_density(model: NoisyModel, x, quad: QuadratureSet) -> np.ndarray:
    """Quadrature approximation of (f_S * G_sigma)(x) for sigma > 0."""
    if model.sigma == 0:
        raise UnsupportedNoiseless("density of a noiseless model is not smoothed; use uniform_density")
    if quad.k_plus_1 != model.dim + 1:
        raise DimMismatch("quadrature weights do not match the model dimension")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    centers = quad.weights @ model.simplex.vertices
    out = mixture_density(centers, model.sigma, np.atleast_2d(x))
    return out[0] if scalar else out


def uniform_density(model: NoisyModel, x) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return contains(model.simplex, x).astype(float) / volume(model.simplex)


def model_density(model: NoisyModel, x, quad: QuadratureSet) -> np.ndarray:
    """Smoothed density for sigma > 0, exact uniform density for sigma == 0."""
    if model.sigma == 0:
        return uniform_density(model, x)
    return noisy_density(model, np.atleast_2d(np.asarray(x, dtype=float)), quad)


def sample_quadrature_model(model: NoisyModel, quad: QuadratureSet, n: int, seed: int) -> np.ndarray:
    """Exact draws from the quadrature mixture (a uniform draw when sigma == 0)."""
    rng = make_rng(seed)
    K = model.dim
    if model.sigma == 0:
        e = rng.standard_exponential((n, K + 1))
        return (e / e.sum(axis=1, keepdims=True)) @ model.simplex.vertices
    idx = rng.integers(0, quad.quad, size=n)
    centers = quad.weights[idx] @ model.simplex.vertices
    return centers + model.sigma * rng.standard_normal((n, K))
