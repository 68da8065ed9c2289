"""Characteristic functions of simplex densities and spectral diagnostics.

For the standard simplex, F(w) = K! i^K g[0, w_1, ..., w_K], the divided
difference of g(t) = e^{-it} on the nodes 0, w_1, ..., w_K. Three evaluators
are provided:

* the closed form (sum over nodes), fast but cancellative near coincident
  or vanishing nodes;
* the divided-difference recursion, pivoting on the largest |w_k| so that the
  division never amplifies error, and switching to the power series once
  every |w_k| <= 1;
* the power series F = K! sum_m (-i)^m h_m(w) / (m + K)!, with h_m the
  complete homogeneous symmetric polynomial.

:func:`cf_standard` uses the closed form where it is well conditioned and the
recursion elsewhere. All evaluators accept a batch of frequencies of shape
(N, K).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedDimension
from .geometry import Simplex, check_nondegenerate, diameter, volume
from .metrics import l2_uniform
from .rng import make_rng
from .sampler import NoisyModel

POLE_RTOL = 1e-6
SERIES_RADIUS = 1.0
SERIES_TERMS = 40
CANCELLATION_LIMIT = 1e-11
DEFAULT_GRID = {1: 2048, 2: 512, 3: 128}
LOW_FREQ_SCALE = 30.0


def _as_batch(omega):
    w = np.asarray(omega, dtype=float)
    return np.atleast_2d(w), w.ndim == 1


def cf_series(omega) -> np.ndarray:
    """Power series; accurate for ||w||_inf <= 1."""
    w, single = _as_batch(omega)
    N, K = w.shape
    # H[j] holds h_m over the first j coordinates, built for m = 0..SERIES_TERMS
    h = np.zeros((N, SERIES_TERMS + 1))
    h[:, 0] = 1.0
    # after the loop h[:, m] = h_m(w_1..w_K)
    h_prev = np.zeros_like(h)
    h_prev[:, 0] = 1.0
    for j in range(K):
        cur = np.empty_like(h_prev)
        cur[:, 0] = 1.0
        for m in range(1, SERIES_TERMS + 1):
            cur[:, m] = h_prev[:, m] + w[:, j] * cur[:, m - 1]
        h_prev = cur
    h = h_prev
    m = np.arange(SERIES_TERMS + 1)
    coef = np.array([math.factorial(K) / math.factorial(k + K) for k in m]) * (-1j) ** m
    out = h @ coef
    return out[0] if single else out


def _f1(w: np.ndarray) -> np.ndarray:
    out = np.empty(w.shape, dtype=complex)
    small = np.abs(w) <= SERIES_RADIUS
    if np.any(small):
        out[small] = cf_series(w[small][:, None])
    big = ~small
    wb = w[big]
    out[big] = (1.0 - np.exp(-1j * wb)) / (1j * wb)
    return out


def _recursive(w: np.ndarray) -> np.ndarray:
    N, k = w.shape
    if k == 0:
        return np.ones(N, dtype=complex)
    if k == 1:
        return _f1(w[:, 0])
    out = np.empty(N, dtype=complex)
    small = np.abs(w).max(axis=1) <= SERIES_RADIUS
    if np.any(small):
        out[small] = cf_series(w[small])
    big = ~small
    if np.any(big):
        wb = w[big]
        order = np.argsort(np.abs(wb), axis=1, kind="stable")
        wb = np.take_along_axis(wb, order, axis=1)
        p = wb[:, -1]
        rest = wb[:, :-1]
        a = _recursive(rest)
        b = _recursive(rest - p[:, None])
        out[big] = (k / (1j * p)) * (a - np.exp(-1j * p) * b)
    return out


def cf_standard_recursive(K: int, omega) -> np.ndarray:
    """CF of the uniform density on the standard K-simplex by the pivoted recursion."""
    w, single = _as_batch(omega)
    if w.shape[1] != K:
        raise ValueError(f"omega has dimension {w.shape[1]}, expected {K}")
    out = _recursive(w)
    return out[0] if single else out


def _closed_terms(w: np.ndarray):
    N, K = w.shape
    terms = np.empty((N, K), dtype=complex)
    for l in range(K):
        denom = w[:, l].astype(complex)
        for j in range(K):
            if j != l:
                denom = denom * (w[:, j] - w[:, l])
        terms[:, l] = (1.0 - np.exp(-1j * w[:, l])) / denom
    scale = math.factorial(K) / (1j) ** K
    return scale * terms


def cf_standard_closed(K: int, omega) -> np.ndarray:
    """Closed-form sum over nodes; no pole handling."""
    w, single = _as_batch(omega)
    if w.shape[1] != K:
        raise ValueError(f"omega has dimension {w.shape[1]}, expected {K}")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = _closed_terms(w).sum(axis=1)
    return out[0] if single else out


def closed_form_ok(omega) -> np.ndarray:
    """Rows where the closed form is used: nodes separated and little cancellation."""
    w, single = _as_batch(omega)
    N, K = w.shape
    gaps = np.abs(w)
    for l in range(K):
        for j in range(l + 1, K):
            gaps = np.minimum(gaps, np.abs(w[:, j] - w[:, l])[:, None])
    thresh = POLE_RTOL * (1.0 + np.abs(w).max(axis=1))
    ok = gaps.min(axis=1) > thresh
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        t = _closed_terms(np.where(ok[:, None], w, 1.0 + np.arange(K)))
        ssum = np.abs(t).sum(axis=1)
        val = np.abs(t.sum(axis=1))
    ok &= np.finfo(float).eps * ssum <= CANCELLATION_LIMIT * np.maximum(val, 1e-300)
    ok &= np.abs(w).max(axis=1) > SERIES_RADIUS
    return ok[0] if single else ok


def cf_standard(K: int, omega) -> np.ndarray:
    """CF of the uniform density on conv{0, e_1, ..., e_K}: E exp(-i w.x)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    w, single = _as_batch(omega)
    if w.shape[1] != K:
        raise ValueError(f"omega has dimension {w.shape[1]}, expected {K}")
    out = np.empty(w.shape[0], dtype=complex)
    ok = closed_form_ok(w)
    if np.any(ok):
        out[ok] = _closed_terms(w[ok]).sum(axis=1)
    if np.any(~ok):
        out[~ok] = _recursive(w[~ok])
    zero = ~np.any(w, axis=1)
    out[zero] = 1.0
    return out[0] if single else out


def cf_simplex(s: Simplex, omega) -> np.ndarray:
    """exp(-i w.v_0) F_std(theta^T w)."""
    check_nondegenerate(s)
    w, single = _as_batch(omega)
    out = np.exp(-1j * (w @ s.origin)) * cf_standard(s.dim, w @ s.theta)
    zero = ~np.any(w, axis=1)
    out[zero] = 1.0
    return out[0] if single else out


def cf_noisy(m: NoisyModel, omega) -> np.ndarray:
    w, single = _as_batch(omega)
    out = cf_simplex(m.simplex, w) * np.exp(-0.5 * m.sigma**2 * (w * w).sum(axis=1))
    return out[0] if single else out


def empirical_cf(points: np.ndarray, omega) -> complex:
    """(1/N) sum exp(-i w.x) over the rows of ``points``."""
    return complex(np.exp(-1j * (np.asarray(points) @ np.asarray(omega, dtype=float))).mean())


@dataclass(frozen=True)
class TailReport:
    alpha: float
    in_band_energy: float
    out_band_energy: float
    total_energy: float
    method: str

    @property
    def normalized_tail(self) -> float:
        return self.out_band_energy / self.total_energy

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "in_band_energy": self.in_band_energy,
            "out_band_energy": self.out_band_energy,
            "total_energy": self.total_energy,
            "normalized_tail": self.normalized_tail,
            "method": self.method,
        }


def tail_energy(
    s: Simplex,
    alpha: float,
    grid: int = None,
    method: str = "closed_form_quadrature",
    mc: int = 200_000,
    seed: int = 0,
) -> TailReport:
    """Split the energy of |F_S|^2 into the cube [-alpha, alpha]^K and its complement.

    The total is (2 pi)^K / Vol(S) by Parseval; the in-band part comes from a
    tensor trapezoid rule (or uniform Monte Carlo in the cube).
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    K = s.dim
    total = (2.0 * math.pi) ** K / volume(s)
    if method == "closed_form_quadrature":
        if K > 3:
            raise UnsupportedDimension("tensor quadrature is limited to K <= 3; use method='monte_carlo'")
        g = grid or DEFAULT_GRID[K]
        axis = np.linspace(-alpha, alpha, g)
        wts = np.full(g, axis[1] - axis[0])
        wts[[0, -1]] *= 0.5
        mesh = np.stack(np.meshgrid(*([axis] * K), indexing="ij"), axis=-1).reshape(-1, K)
        wmesh = np.ones(1)
        for _ in range(K):
            wmesh = np.outer(wmesh, wts).ravel()
        inband = 0.0
        step = 1 << 16
        for a in range(0, len(mesh), step):
            f = cf_simplex(s, mesh[a : a + step])
            inband += float((np.abs(f) ** 2 * wmesh[a : a + step]).sum())
    elif method == "monte_carlo":
        rng = make_rng(seed, "tail")
        w = rng.uniform(-alpha, alpha, size=(mc, K))
        inband = (2.0 * alpha) ** K * float((np.abs(cf_simplex(s, w)) ** 2).mean())
    else:
        raise ValueError(f"unknown method {method!r}")
    return TailReport(float(alpha), inband, total - inband, total, method)


def smoothed_l2_sq_fourier(s1: Simplex, s2: Simplex, sigma: float, mc: int = 100_000, seed: int = 0):
    """||(f1 - f2) * G_sigma||_2^2 = (2 pi)^-K int |F1 - F2|^2 exp(-sigma^2 |w|^2) dw, and its SE.

    Frequencies are drawn from an equal mixture of N(0, I / (2 sigma^2)),
    which matches the Gaussian factor and bounds the importance weights, and
    a low-frequency component of scale LOW_FREQ_SCALE / diameter that keeps
    the variance small as sigma -> 0.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    K = s1.dim
    rng = make_rng(seed, "smoothed-l2")
    a = 1.0 / (math.sqrt(2.0) * sigma)
    b = min(a, LOW_FREQ_SCALE / max(diameter(s1), diameter(s2)))
    scale = np.where(rng.random(mc) < 0.5, a, b)
    w = rng.standard_normal((mc, K)) * scale[:, None]
    r2 = (w * w).sum(axis=1)
    q = 0.5 * (
        np.exp(-r2 / (2 * a * a)) / (2 * math.pi * a * a) ** (K / 2)
        + np.exp(-r2 / (2 * b * b)) / (2 * math.pi * b * b) ** (K / 2)
    )
    d = np.abs(cf_simplex(s1, w) - cf_simplex(s2, w)) ** 2 * np.exp(-sigma * sigma * r2) / q
    d /= (2.0 * math.pi) ** K
    return float(d.mean()), float(d.std(ddof=1) / math.sqrt(mc))


@dataclass(frozen=True)
class RecoverabilityReport:
    sigma: float
    snr: float
    l2: float
    l2_se: float
    smoothed_l2: float
    smoothed_l2_se: float
    ratio: float
    envelope: float
    envelope_c: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def recoverability_check(
    s1: Simplex, s2: Simplex, sigma: float, mc: int = 100_000, seed: int = 0, c: float = 1.0
) -> RecoverabilityReport:
    """Measured ||f1 - f2||_2 / ||(f1 - f2) * G_sigma||_2 next to exp(c K / SNR^2).

    ``c`` stands in for an unspecified constant and is only reported.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    K = s1.dim
    l2 = l2_uniform(s1, s2, mc, seed)
    sq, sq_se = smoothed_l2_sq_fourier(s1, s2, sigma, mc, seed)
    sm = math.sqrt(max(sq, 0.0))
    sm_se = sq_se / (2.0 * sm) if sm > 0 else math.sqrt(sq_se)
    ratio = l2.value / sm if sm > 0 else math.inf
    snr_val = max(diameter(s1), diameter(s2)) / (K * sigma)
    return RecoverabilityReport(
        float(sigma), snr_val, l2.value, l2.std_error, sm, sm_se, ratio,
        math.exp(c * K / snr_val**2), float(c),
    )
