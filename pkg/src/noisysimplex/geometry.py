"""Simplex representation and geometric functionals.

A K-simplex is stored as a ``(K+1, K)`` array, one vertex per row. The
edge matrix ``theta`` has the vectors ``v_i - v_0`` (i = 1..K) as columns,
so that a point with barycentric weights ``phi`` is
``v_0 + theta @ phi[1:]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSimplex, DimMismatch

DEGENERACY_RTOL = 1e-12
MEMBERSHIP_TOL = 1e-9


@dataclass(frozen=True)
class Simplex:
    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] + 1 or v.shape[1] < 1:
            raise DimMismatch(f"expected (K+1, K) vertex array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertex coordinates must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def origin(self) -> np.ndarray:
        return self.vertices[0]

    @property
    def theta(self) -> np.ndarray:
        """Edge matrix with columns ``v_i - v_0``."""
        return (self.vertices[1:] - self.vertices[0]).T

    @property
    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    @classmethod
    def standard(cls, K: int) -> "Simplex":
        """conv{0, e_1, ..., e_K}."""
        return cls(np.vstack([np.zeros(K), np.eye(K)]))

    def translate(self, b) -> "Simplex":
        return Simplex(self.vertices + np.asarray(b, dtype=float))

    def affine(self, A, b=None) -> "Simplex":
        """Image under x -> A x + b."""
        A = np.asarray(A, dtype=float)
        out = self.vertices @ A.T
        if b is not None:
            out = out + np.asarray(b, dtype=float)
        return Simplex(out)

    def scale(self, c: float) -> "Simplex":
        return Simplex(self.vertices * c)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "vertices": self.vertices.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Simplex":
        s = cls(np.asarray(d["vertices"], dtype=float))
        if "dim" in d and int(d["dim"]) != s.dim:
            raise DimMismatch(f"dim field {d['dim']} disagrees with vertices ({s.dim})")
        return s

    def __eq__(self, other):
        if not isinstance(other, Simplex):
            return NotImplemented
        return np.array_equal(self.vertices, other.vertices)

    def __hash__(self):
        return hash(self.vertices.tobytes())


def load_simplex(path) -> Simplex:
    with open(path) as fh:
        return Simplex.from_dict(json.load(fh))


@dataclass(frozen=True)
class GeometrySummary:
    volume: float
    a_max: float
    l_max: float
    lambda_min: float
    lambda_max: float


def volume(s: Simplex) -> float:
    return abs(np.linalg.det(s.theta)) / math.factorial(s.dim)


def diameter(s: Simplex) -> float:
    """Longest edge; the diameter of a simplex is attained at two vertices."""
    v = s.vertices
    diff = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((diff**2).sum(-1)).max())


def check_nondegenerate(s: Simplex) -> None:
    l_max = diameter(s)
    det = abs(np.linalg.det(s.theta))
    if l_max == 0.0 or det < DEGENERACY_RTOL * l_max**s.dim:
        raise DegenerateSimplex(f"|det theta| = {det:.3g} for a simplex of diameter {l_max:.3g}")


def is_degenerate(s: Simplex) -> bool:
    try:
        check_nondegenerate(s)
    except DegenerateSimplex:
        return True
    return False


def facet_measures(s: Simplex) -> np.ndarray:
    """(K-1)-volume of the facet opposite each vertex.

    A 0-dimensional facet (K = 1) gets counting measure 1.
    """
    K = s.dim
    if K == 1:
        return np.ones(2)
    out = np.empty(K + 1)
    for i in range(K + 1):
        facet = np.delete(s.vertices, i, axis=0)
        G = (facet[1:] - facet[0]).T
        gram = G.T @ G
        out[i] = math.sqrt(max(np.linalg.det(gram), 0.0)) / math.factorial(K - 1)
    return out


def geometry_summary(s: Simplex) -> GeometrySummary:
    check_nondegenerate(s)
    sv = np.linalg.svd(s.theta, compute_uv=False)
    return GeometrySummary(
        volume=volume(s),
        a_max=float(facet_measures(s).max()),
        l_max=diameter(s),
        lambda_min=float(sv.min()),
        lambda_max=float(sv.max()),
    )


def is_isoperimetric(s: Simplex, theta_lo: float, theta_hi: float) -> bool:
    """Definition-2 test: a_max <= theta_hi Vol^((K-1)/K) and l_max <= theta_lo K Vol^(1/K)."""
    if theta_lo <= 0 or theta_hi <= 0:
        raise ValueError("theta_lo and theta_hi must be positive")
    g = geometry_summary(s)
    K = s.dim
    return bool(
        g.a_max <= theta_hi * g.volume ** ((K - 1) / K)
        and g.l_max <= theta_lo * K * g.volume ** (1.0 / K)
    )


def barycentric(s: Simplex, x) -> np.ndarray:
    """Barycentric weights of ``x`` (shape (K,) or (n, K)) w.r.t. the vertices."""
    check_nondegenerate(s)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != s.dim:
        raise DimMismatch(f"point dimension {x.shape[-1]} != simplex dimension {s.dim}")
    rhs = (x - s.origin).reshape(-1, s.dim).T
    tail = np.linalg.solve(s.theta, rhs).T
    phi = np.concatenate([1.0 - tail.sum(axis=1, keepdims=True), tail], axis=1)
    return phi.reshape(x.shape[:-1] + (s.dim + 1,))


def contains(s: Simplex, x, tol: float = MEMBERSHIP_TOL):
    """Membership test; returns a bool or a boolean array for a batch of points."""
    phi = barycentric(s, x)
    inside = np.all(phi >= -tol, axis=-1)
    return bool(inside) if np.ndim(inside) == 0 else inside


def snr(s: Simplex, sigma: float) -> float:
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        return math.inf
    return diameter(s) / (s.dim * sigma)


def altitude_to_facet(s: Simplex, i: int):
    """Unit normal of the facet opposite vertex ``i`` pointing toward ``v_i``, and the height."""
    K = s.dim
    apex = s.vertices[i]
    facet = np.delete(s.vertices, i, axis=0)
    if K == 1:
        d = apex - facet[0]
        h = float(np.linalg.norm(d))
        return d / h, h
    G = (facet[1:] - facet[0]).T
    # component of (apex - facet[0]) orthogonal to the facet's span
    q, _ = np.linalg.qr(G)
    r = apex - facet[0]
    n = r - q @ (q.T @ r)
    h = float(np.linalg.norm(n))
    return n / h, h
