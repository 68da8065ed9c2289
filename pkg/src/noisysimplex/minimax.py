"""Hypothesis families behind the minimax lower bounds, and empirical risk.

Three constructions around the standard simplex are provided:

* ``fano_family``: translates of the standard simplex packed in a small ball;
* ``assouad_family``: bit-coded vertex perturbations, either one bit per
  off-diagonal vertex coordinate (vertex_l1 mode, decoded lazily) or one bit
  per vertex (tv mode);
* ``lecam_pair``: a simplex and its shift along the altitude of its largest
  facet.

Lower bounds are reported next to empirical risks and never asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import PackingBudgetExceeded
from .geometry import Simplex, altitude_to_facet, check_nondegenerate, facet_measures, volume
from .metrics import tv_uniform
from .rng import derive_seed, make_rng
from .sampler import NoisyModel, sample

FANO = "fano_translate"
ASSOUAD = "assouad_bits"
LECAM = "lecam_pair"


@dataclass
class HypothesisFamily:
    members: list
    construction: str
    zeta: float
    codes: Optional[list] = None
    info: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.members[0].dim

    def __len__(self) -> int:
        return len(self.members)


def translate_tv_exact(t1, t2) -> float:
    """TV between the uniform densities on Delta_K + t1 and Delta_K + t2.

    The intersection is {x >= max(0, d), sum x <= 1 + min(0, sum d)} shifted
    by t1 with d = t2 - t1, a scaled standard simplex of side s, so
    TV = 1 - max(s, 0)^K.
    """
    d = np.asarray(t2, dtype=float) - np.asarray(t1, dtype=float)
    s = 1.0 + min(0.0, float(d.sum())) - float(np.maximum(d, 0.0).sum())
    return 1.0 - max(s, 0.0) ** len(d)


def fano_family(K: int, zeta: float, M: int, seed: int = 0, budget: int = 1_000_000) -> HypothesisFamily:
    """Translates Delta_K + t_j with ||t_j|| <= zeta/K, pairwise ||t_j - t_k|| >= zeta/(2K).

    Distance alone does not force pairwise TV >= zeta/2, so proposals must
    also clear that threshold, checked exactly with :func:`translate_tv_exact`.
    """
    if not 0 < zeta <= 0.5:
        raise ValueError("zeta must lie in (0, 1/2]")
    if M < 2:
        raise ValueError("M must be >= 2")
    rng = make_rng(seed, "fano")
    r, sep = zeta / K, zeta / (2 * K)
    shifts = []
    block = 4096
    used = 0
    while len(shifts) < M and used < budget:
        g = rng.standard_normal((block, K))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        prop = g * (r * rng.random(block) ** (1.0 / K))[:, None]
        for t in prop:
            used += 1
            if all(
                np.linalg.norm(t - u) >= sep and translate_tv_exact(t, u) >= zeta / 2 for u in shifts
            ):
                shifts.append(t)
                if len(shifts) == M:
                    break
            if used >= budget:
                break
    if len(shifts) < M:
        raise PackingBudgetExceeded(
            f"packed {len(shifts)} of {M} translates in {budget} proposals", achieved=len(shifts)
        )
    base = Simplex.standard(K)
    members = [base.translate(t) for t in shifts]
    return HypothesisFamily(members, FANO, zeta, info={"shifts": [t.tolist() for t in shifts], "proposals": used})


class AssouadCodebook:
    """Lazy family v_i = e_i + zeta (1 - 2 b_i) off the diagonal, v_0 = 0.

    A code is a 0/1 array of K (K - 1) bits, row i listing the off-diagonal
    bits of vertex i in coordinate order.
    """

    def __init__(self, K: int, zeta: float):
        if K < 2:
            raise ValueError("the vertex_l1 family needs K >= 2")
        self.K = K
        self.zeta = float(zeta)
        self.n_bits = K * (K - 1)
        self._off = ~np.eye(K, dtype=bool)

    def decode(self, code) -> Simplex:
        b = np.asarray(code, dtype=int).reshape(self.K, self.K - 1)
        V = np.eye(self.K)
        V[self._off] = self.zeta * (1 - 2 * b.ravel())
        s = Simplex(np.vstack([np.zeros(self.K), V]))
        check_nondegenerate(s)
        return s

    def encode(self, s: Simplex) -> np.ndarray:
        """psi: bit = (1 - sign(x_i^j)) / 2 for i != j; the diagonal carries no bit."""
        x = s.vertices[1:]
        return ((1 - np.sign(x[self._off])) // 2).astype(int)

    def neighbors(self, code) -> list:
        code = np.asarray(code, dtype=int)
        out = []
        for k in range(self.n_bits):
            c = code.copy()
            c[k] ^= 1
            out.append(c)
        return out

    def sample_codes(self, count: int, seed: int) -> list:
        rng = make_rng(seed, "assouad-codes")
        return [rng.integers(0, 2, self.n_bits) for _ in range(count)]


def _tv_mode_simplex(K: int, zeta: float, bits) -> Simplex:
    V = np.eye(K)
    for i, b in enumerate(bits):
        if b:
            V[i] += zeta * (1.0 - np.eye(K)[i])
    return Simplex(np.vstack([np.zeros(K), V]))


def assouad_family(K: int, zeta: float, mode: str = "tv", subsample: int = 64, seed: int = 0) -> HypothesisFamily:
    """Bit-coded families; ``mode`` is "vertex_l1" (lazy) or "tv" (all 2^K members)."""
    if mode == "vertex_l1":
        book = AssouadCodebook(K, zeta)
        codes = book.sample_codes(subsample, seed)
        members = [book.decode(c) for c in codes]
        return HypothesisFamily(members, ASSOUAD, zeta, codes, {"mode": mode, "codebook": book})
    if mode == "tv":
        if not 2 <= K <= 12:
            raise ValueError("tv mode is materialized for 2 <= K <= 12")
        codes = [np.array([(c >> (K - 1 - i)) & 1 for i in range(K)]) for c in range(2**K)]
        members = []
        for c in codes:
            s = _tv_mode_simplex(K, zeta, c)
            check_nondegenerate(s)
            members.append(s)
        return HypothesisFamily(members, ASSOUAD, zeta, codes, {"mode": mode})
    raise ValueError(f"unknown mode {mode!r}")


def lecam_pair(s: Simplex, zeta: float) -> HypothesisFamily:
    """{S, S + zeta u} with u the inward unit altitude of the largest facet.

    Sliding toward the apex leaves a homothetic copy of ratio 1 - zeta/h as
    the overlap, so TV = 1 - (1 - zeta/h)^K exactly; K zeta / h is its
    first-order expansion and an upper bound. Both are reported.
    """
    if zeta < 0:
        raise ValueError("zeta must be >= 0")
    check_nondegenerate(s)
    K = s.dim
    i = int(np.argmax(facet_measures(s)))
    u, h_alt = altitude_to_facet(s, i)
    vol = volume(s)
    h = K * vol / float(facet_measures(s)[i]) if K > 1 else h_alt
    exact = 1.0 - max(1.0 - zeta / h, 0.0) ** K
    info = {"height": h, "direction": u.tolist(), "tv_linear": K * zeta / h, "tv_exact": exact}
    return HypothesisFamily([s, s.translate(zeta * u)], LECAM, zeta, info=info)


@dataclass
class RiskReport:
    rows: list  # (member_id, trial, tv_error)
    member_mean: list
    member_se: list
    max_risk: float
    max_risk_se: float
    bounds: dict

    def to_dict(self) -> dict:
        return {
            "member_mean": self.member_mean,
            "member_se": self.member_se,
            "max_risk": self.max_risk,
            "max_risk_se": self.max_risk_se,
            "bounds": self.bounds,
        }


def lower_bound_report(family: HypothesisFamily, sigma: float, n: int) -> dict:
    """The lower-bound rates solved for eps at sample size n (constants set to 1)."""
    base = family.members[0]
    K = base.dim
    vol = volume(base)
    theta_eff = float(facet_measures(base).max()) / vol ** ((K - 1) / K)
    return {
        "noisy_K3": math.sqrt(K**3 * sigma**2 / n),
        "noiseless_K": K / n,
        "fano_statement": math.sqrt(sigma**2 * theta_eff**2 / n),
        "fano_proof": math.sqrt(sigma**2 * theta_eff**2 / n) / vol ** (1.0 / K),
        "theta_eff": theta_eff,
    }


def empirical_minimax(
    family: HypothesisFamily,
    sigma: float,
    n: int,
    trials: int,
    learner: Union[Callable, object],
    seed: int = 0,
    tv_mc: int = 20_000,
) -> RiskReport:
    """Mean TV error per member over fresh data sets, and its maximum over members.

    ``learner`` is a callable SampleSet -> Simplex (or -> object with a
    ``simplex`` attribute).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rows = []
    means, ses = [], []
    for mi, member in enumerate(family.members):
        errs = []
        for t in range(trials):
            data = sample(NoisyModel(member, sigma), n, derive_seed(seed, "minimax", mi, t))
            est = learner(data)
            est = getattr(est, "simplex", est)
            e = tv_uniform(member, est, tv_mc, derive_seed(seed, "risk", mi, t)).value
            errs.append(e)
            rows.append((mi, t, e))
        errs = np.asarray(errs)
        means.append(float(errs.mean()))
        ses.append(float(errs.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0)
    k = int(np.argmax(means))
    return RiskReport(rows, means, ses, means[k], ses[k], lower_bound_report(family, sigma, n))
