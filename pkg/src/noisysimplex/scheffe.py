"""Scheffé tournament over a candidate family and the end-to-end learner.

For every pair i < j the Scheffé set is A_ij = {x : f_i(x) > f_j(x)}. Hypothesis
i's mass P_i(A_ij) is estimated from ``mc_mass`` draws of hypothesis i, the
data mass mu_n(A_ij) is the fraction of selection samples in A_ij, and the
hypothesis whose mass is closer to mu_n wins the duel (the lower index on a
tie). The hypothesis with the most duel wins is returned, again breaking ties
by index.

All densities in one call share a single quadrature, so duplicated hypotheses
have identical densities and an empty Scheffé set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .cover import (
    APPENDIX_BASE,
    CandidateFamily,
    CoverSpec,
    cover_local,
    cover_sphere,
    enumerate_candidates,
    lemma_alpha,
    noise_grid,
    passes_filters,
    vertex_resolution,
)
from .density import QuadratureSet, make_quadrature, model_density, noisy_density  # noqa: F401
from .errors import EmptyFamily, InsufficientCover, InvalidConfig, NoiseBoundUndefined
from .geometry import Simplex, diameter, volume
from .localization import RN_STATEMENT, LocalizationBall, localize
from .rng import derive_seed, make_rng
from .sampler import NoisyModel, SampleSet, sample
from .seeding import SeedFit, enclosing_simplex, fit_seed


@dataclass(frozen=True)
class DuelRecord:
    i: int
    j: int
    mass_i: float  # P_i(A_ij)
    mass_j: float  # P_j(A_ij)
    empirical: float  # mu_n(A_ij)
    winner: int

    @property
    def discrepancy_i(self) -> float:
        return abs(self.mass_i - self.empirical)

    @property
    def discrepancy_j(self) -> float:
        return abs(self.mass_j - self.empirical)


@dataclass
class TournamentOutcome:
    winner: int
    wins: list
    duels: list
    n_used: int

    def to_dict(self, include_duels: bool = False) -> dict:
        d = {"winner": self.winner, "wins": list(self.wins), "n_used": self.n_used, "duels": len(self.duels)}
        if include_duels:
            d["duel_records"] = [
                [r.i, r.j, r.discrepancy_i, r.discrepancy_j, r.winner] for r in self.duels
            ]
        return d


def min_samples_select(M: int, epsilon: float, delta: float) -> int:
    """ceil(log(3 M^2 / delta) / (2 eps^2))."""
    if M < 1 or not 0 < epsilon < 1 or not 0 < delta < 1:
        raise InvalidConfig("need M >= 1 and epsilon, delta in (0, 1)")
    return math.ceil(math.log(3.0 * M * M / delta) / (2.0 * epsilon * epsilon))


def theorem4_sample_bound(
    R: float, R_n: float, K: int, epsilon: float, delta: float, theta_hi: float, vol: float
) -> float:
    """Reporting-only sample bound of the full pipeline (constant 50)."""
    a = math.log(30.0 * R_n * math.sqrt(K) / (delta * epsilon))
    b = 2.0 * (K + 1) ** 2 * math.log1p(100.0 * R * theta_hi * (K + 1) / (epsilon * vol ** (1.0 / K)))
    return 50.0 * (a + b) / epsilon**2


def _hypothesis_models(family) -> list:
    hyps = family.hypotheses if isinstance(family, CandidateFamily) else list(family)
    return [h if isinstance(h, NoisyModel) else NoisyModel(h[0], h[1]) for h in hyps]


def scheffe_select(
    family,
    data: SampleSet,
    quad_size: int = 4000,
    mc_mass: int = 20_000,
    seed: int = 0,
) -> TournamentOutcome:
    """Run the round-robin tournament; ``family`` is a CandidateFamily or a list of models."""
    models = _hypothesis_models(family)
    M = len(models)
    if M == 0:
        raise EmptyFamily("cannot select from an empty family")
    if M == 1:
        return TournamentOutcome(0, [0], [], data.n)
    K = models[0].dim
    q = make_quadrature(K, quad_size, derive_seed(seed, "quad"))

    def densities(x):
        return np.stack([model_density(m, x, q) for m in models])

    fd = densities(data.points)  # (M, n)
    # gt[h, j]: draws of h where f_h > f_j; lt[h, j]: draws of h where f_j > f_h
    gt = np.zeros((M, M), dtype=np.int64)
    lt = np.zeros((M, M), dtype=np.int64)
    for h, m in enumerate(models):
        x = sample(m, mc_mass, derive_seed(seed, "mass", h)).points
        fh = densities(x)
        gt[h] = (fh[h][None, :] > fh).sum(axis=1)
        lt[h] = (fh > fh[h][None, :]).sum(axis=1)

    wins = [0] * M
    duels = []
    for i in range(M):
        for j in range(i + 1, M):
            mass_i = gt[i, j] / mc_mass
            mass_j = lt[j, i] / mc_mass
            mu = float(np.mean(fd[i] > fd[j]))
            w = i if abs(mass_i - mu) <= abs(mass_j - mu) else j
            wins[w] += 1
            duels.append(DuelRecord(i, j, float(mass_i), float(mass_j), mu, w))
    best = max(wins)
    winner = wins.index(best)
    return TournamentOutcome(winner, wins, duels, data.n)


@dataclass(frozen=True)
class LearnerConfig:
    epsilon: float = 0.1
    delta: float = 0.1
    theta_lo: float = 5.0
    theta_hi: float = 5.0
    point_budget: int = 400
    global_tuples: int = 10
    seeded_budget: int = 15
    sigma_neighbors: int = 2
    quad_size: int = 256
    mc_mass: int = 800
    rn_variant: str = RN_STATEMENT
    cover_base: float = APPENDIX_BASE
    vol_floor: Optional[float] = None
    vol_floor_frac: float = 0.25
    local_radius_sigma: float = 0.5
    local_radius_frac: float = 0.03
    seed_fit_points: Optional[int] = None  # None: all localization points up to seed_fit_cap
    seed_fit_cap: int = 8000
    seed_quad: int = 512
    seed: int = 0
    forced_candidates: Optional[tuple] = None
    forced_only: bool = False

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise InvalidConfig(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise InvalidConfig(f"delta must lie in (0, 1), got {self.delta}")
        if self.theta_lo <= 0 or self.theta_hi <= 0:
            raise InvalidConfig("theta_lo and theta_hi must be positive")
        for name in ("point_budget", "seeded_budget", "sigma_neighbors", "quad_size", "mc_mass"):
            if getattr(self, name) < 1:
                raise InvalidConfig(f"{name} must be >= 1")
        if self.global_tuples < 0:
            raise InvalidConfig("global_tuples must be >= 0")
        if self.rn_variant not in ("statement", "proof"):
            raise InvalidConfig(f"unknown rn_variant {self.rn_variant!r}")


@dataclass
class LearnResult:
    simplex: Simplex
    sigma: float
    outcome: TournamentOutcome
    ball: LocalizationBall
    family: CandidateFamily
    seed_fit: SeedFit
    alpha: float
    eps_cov: float
    noise_bound_fallback: bool = False
    sigmas: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "simplex": self.simplex.to_dict(),
            "sigma": self.sigma,
            "ball": self.ball.to_dict(),
            "noise_bound_fallback": self.noise_bound_fallback,
            "alpha": self.alpha,
            "eps_cov": self.eps_cov,
            "sigma_candidates": list(self.sigmas),
            "family": {
                "M": self.family.M,
                "cover_points_used": self.family.cover_points_used,
                "truncated": self.family.truncated,
            },
            "tournament": self.outcome.to_dict(),
        }


def _localize_with_fallback(half: SampleSet, variant: str):
    try:
        return localize(half, variant), False
    except NoiseBoundUndefined as e:
        # E[D] = tr Cov(y) >= K sigma^2, so D itself bounds sigma^2 at low K
        return replace(e.ball, noise_bound=e.ball.statistic), True


def _nearest_sigmas(grid, sigma_hat: float, count: int, include_zero: bool) -> list:
    order = sorted(range(len(grid)), key=lambda i: (abs(grid[i] - sigma_hat), i))
    chosen = {grid[i] for i in order[:count]}
    if include_zero:
        chosen.add(0.0)
    return sorted(chosen)


def _seeded_family(ball, seed_fit, spec, eps_cov, cfg, vol_floor, sigmas, rng, loc_points) -> CandidateFamily:
    K = ball.dim
    V = seed_fit.simplex.vertices
    radius = cfg.local_radius_sigma * seed_fit.sigma + cfg.local_radius_frac * diameter(seed_fit.simplex)
    local = cover_local(ball, eps_cov, V, radius, spec, cfg.cover_base)
    # a fitted vertex inside the ball is itself a legitimate cover point
    sets = [
        np.vstack([v[None, :], c.points]) if np.linalg.norm(v - ball.center) <= ball.radius else c.points
        for v, c in zip(V, local)
    ]
    if any(len(p) == 0 for p in sets):
        raise InsufficientCover("a seed vertex has no cover point inside the localization ball")
    snapped = tuple(int(np.argmin(((p - v) ** 2).sum(1))) for p, v in zip(sets, V))
    tuples = [snapped]
    seen = {snapped}
    sizes = [len(p) for p in sets]
    total = math.prod(sizes)
    target = min(cfg.seeded_budget, total)
    attempts = 0
    while len(tuples) < target and attempts < 50 * cfg.seeded_budget:
        t = tuple(int(rng.integers(0, s)) for s in sizes)
        attempts += 1
        if t not in seen:
            seen.add(t)
            tuples.append(t)
    hyps = []
    for t in tuples:
        s = Simplex(np.stack([sets[i][t[i]] for i in range(K + 1)]))
        if passes_filters(s, vol_floor, cfg.theta_lo, cfg.theta_hi):
            hyps.extend((s, sig) for sig in sigmas)
    if seed_fit.at_floor:
        # noiseless data lies inside the truth, which the blurred fit undershoots
        enc = enclosing_simplex(seed_fit.simplex, loc_points)
        if ball.contains_simplex(enc.vertices) and passes_filters(enc, vol_floor, cfg.theta_lo, cfg.theta_hi):
            hyps.extend((enc, sig) for sig in sigmas)
    truncated = any(c.truncated for c in local) or total > cfg.seeded_budget
    return CandidateFamily(hyps, sum(sizes), truncated)


def learn(data: SampleSet, config: LearnerConfig = LearnerConfig()) -> LearnResult:
    """Localize on even-indexed samples, build candidates, select on odd-indexed samples."""
    cfg = config
    if data.n < 4:
        raise ValueError("learn needs at least 4 samples")
    K = data.dim
    loc_half = data.subset(slice(0, None, 2))
    sel_half = data.subset(slice(1, None, 2))
    ball, fallback = _localize_with_fallback(loc_half, cfg.rn_variant)

    fit_points = cfg.seed_fit_points or min(loc_half.n, cfg.seed_fit_cap)
    fit = fit_seed(loc_half.points, derive_seed(cfg.seed, "seed"), fit_points, cfg.seed_quad)
    vol_floor = cfg.vol_floor if cfg.vol_floor is not None else cfg.vol_floor_frac * volume(fit.simplex)
    alpha = lemma_alpha(vol_floor, K, cfg.theta_hi)
    spec = CoverSpec(cfg.epsilon, alpha, cfg.point_budget, max(cfg.global_tuples, 1), derive_seed(cfg.seed, "cover"))
    eps_cov = vertex_resolution(spec, K)
    grid = noise_grid(ball.noise_bound, cfg.epsilon, K)
    sigmas = _nearest_sigmas(grid, fit.sigma, cfg.sigma_neighbors, fit.at_floor)

    family = CandidateFamily([], 0, False)
    if cfg.forced_candidates:
        family = CandidateFamily([(s, float(sig)) for s, sig in cfg.forced_candidates], 0, False)
    if cfg.forced_only:
        if family.M == 0:
            raise EmptyFamily("forced_only needs forced_candidates")
        outcome = scheffe_select(family, sel_half, cfg.quad_size, cfg.mc_mass, derive_seed(cfg.seed, "select"))
        s, sig = family.hypotheses[outcome.winner]
        return LearnResult(s, float(sig), outcome, ball, family, fit, alpha, eps_cov, fallback, sigmas)
    rng = make_rng(cfg.seed, "seeded-tuples")
    family = family.extend(_seeded_family(ball, fit, spec, eps_cov, cfg, vol_floor, sigmas, rng, loc_half.points))
    if cfg.global_tuples > 0:
        pts = cover_sphere(ball, eps_cov, spec, cfg.cover_base)
        if len(pts.points) >= K + 1:
            try:
                fam = enumerate_candidates(pts, ball, spec, cfg.theta_lo, cfg.theta_hi, vol_floor, sigmas)
                family = family.extend(fam)
            except EmptyFamily:
                family = family.extend(CandidateFamily([], len(pts.points), pts.truncated))
    if family.M == 0:
        raise EmptyFamily("no candidate survived the filters")

    outcome = scheffe_select(family, sel_half, cfg.quad_size, cfg.mc_mass, derive_seed(cfg.seed, "select"))
    s, sig = family.hypotheses[outcome.winner]
    return LearnResult(s, float(sig), outcome, ball, family, fit, alpha, eps_cov, fallback, sigmas)
