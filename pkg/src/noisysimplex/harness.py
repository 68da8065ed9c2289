"""Experiment orchestration: validated configs, seeded trials, CSV and JSON reports.

Seeds: trial t draws its data from ``derive_seed(seed, "data", t)`` and runs
the learner with ``derive_seed(seed, "learn", t)``, independently of the sweep
value, so every point of a sweep sees the same underlying random draws.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Union

import numpy as np

from . import __version__
from .errors import InvalidConfig
from .geometry import Simplex, snr
from .metrics import l2_uniform, tv_uniform, vertex_l1
from .rng import derive_seed
from .sampler import NoisyModel, sample
from .scheffe import LearnerConfig, learn

SCHEMA = 1


def build_tag() -> str:
    return f"noisysimplex-{__version__}"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()[:16]


def provenance(cfg_obj, seed: int) -> dict:
    return {"build": build_tag(), "config_hash": config_hash(cfg_obj), "seed": int(seed)}


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


@dataclass
class ExperimentConfig:
    K: int = 2
    n: Union[int, list] = 2000
    sigma: Union[float, list] = 0.05
    epsilon: float = 0.1
    delta: float = 0.1
    theta_hi: float = 5.0
    theta_lo: float = 5.0
    point_budget: int = 400
    global_tuples: int = 10
    seeded_budget: int = 15
    quad_size: int = 256
    mc_mass: int = 800
    trials: int = 5
    seed: int = 0
    out: str = "results"
    simplex: Optional[dict] = None
    tv_mc: int = 20_000
    knee_factor: float = 2.0
    workers: int = 1
    timing: bool = False

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise InvalidConfig(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as e:
                raise InvalidConfig(f"{path}: {e}") from None
        d.pop("schema", None)
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        return asdict(self)

    def hash_payload(self) -> dict:
        d = self.to_dict()
        for k in ("out", "workers", "timing"):
            d.pop(k)
        return d

    @property
    def sweep_axis(self) -> Optional[str]:
        axes = [a for a in ("n", "sigma") if isinstance(getattr(self, a), list)]
        return axes[0] if axes else None

    def sweep_values(self) -> list:
        axis = self.sweep_axis
        if axis is None:
            return [(self.n, self.sigma)]
        vals = getattr(self, axis)
        return [(v, self.sigma) for v in vals] if axis == "n" else [(self.n, v) for v in vals]

    def validate(self) -> None:
        def bad(msg):
            raise InvalidConfig(msg)

        if not isinstance(self.K, int) or not 1 <= self.K <= 4:
            bad(f"K must be an integer in 1..4, got {self.K!r}")
        if isinstance(self.n, list) and isinstance(self.sigma, list):
            bad("only one of n and sigma may be a sweep list")
        ns = self.n if isinstance(self.n, list) else [self.n]
        sigmas = self.sigma if isinstance(self.sigma, list) else [self.sigma]
        if not ns or not all(isinstance(v, int) and v >= 4 for v in ns):
            bad("n values must be integers >= 4")
        if not sigmas or not all(isinstance(v, (int, float)) and v >= 0 for v in sigmas):
            bad("sigma values must be >= 0")
        if not 0 < self.epsilon < 1 or not 0 < self.delta < 1:
            bad("epsilon and delta must lie in (0, 1)")
        if self.theta_hi <= 0 or self.theta_lo <= 0:
            bad("theta_hi and theta_lo must be positive")
        for name in ("point_budget", "seeded_budget", "quad_size", "mc_mass", "trials", "tv_mc", "workers"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                bad(f"{name} must be a positive integer")
        if self.global_tuples < 0:
            bad("global_tuples must be >= 0")
        if self.knee_factor <= 1:
            bad("knee_factor must exceed 1")
        if self.simplex is not None:
            try:
                s = Simplex.from_dict(self.simplex)
            except Exception as e:  # noqa: BLE001
                bad(f"invalid simplex: {e}")
            if s.dim != self.K:
                bad(f"simplex dimension {s.dim} != K = {self.K}")

    def true_simplex(self) -> Simplex:
        return Simplex.from_dict(self.simplex) if self.simplex else Simplex.standard(self.K)

    def learner(self, seed: int) -> LearnerConfig:
        return LearnerConfig(
            epsilon=self.epsilon, delta=self.delta, theta_lo=self.theta_lo, theta_hi=self.theta_hi,
            point_budget=self.point_budget, global_tuples=self.global_tuples,
            seeded_budget=self.seeded_budget, quad_size=self.quad_size, mc_mass=self.mc_mass, seed=seed,
        )


CSV_COLUMNS = ["trial", "n", "sigma", "snr", "tv_error", "l2_error", "vertex_l1_error", "runtime_ms"]


def _run_trial(args):
    cfg, n, sigma, t = args
    truth = cfg.true_simplex()
    t0 = time.perf_counter()
    data = sample(NoisyModel(truth, sigma), n, derive_seed(cfg.seed, "data", t))
    res = learn(data, cfg.learner(derive_seed(cfg.seed, "learn", t)))
    ms = (time.perf_counter() - t0) * 1000.0
    tv_seed = derive_seed(cfg.seed, "tv", t)
    return {
        "trial": t,
        "n": n,
        "sigma": float(sigma),
        "snr": snr(truth, sigma),
        "tv_error": float(tv_uniform(truth, res.simplex, cfg.tv_mc, tv_seed).value),
        "l2_error": float(l2_uniform(truth, res.simplex, cfg.tv_mc, tv_seed).value),
        "vertex_l1_error": vertex_l1(truth, res.simplex).cost,
        "runtime_ms": ms,
    }


def run_trials(cfg: ExperimentConfig) -> list:
    jobs = [(cfg, n, s, t) for n, s in cfg.sweep_values() for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            return list(ex.map(_run_trial, jobs))
    return [_run_trial(j) for j in jobs]


def _fmt(v) -> str:
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def rows_to_csv(rows: list, prov: dict, timing: bool) -> str:
    buf = io.StringIO()
    buf.write(f"# build={prov['build']} config_hash={prov['config_hash']} seed={prov['seed']}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) if (c != "runtime_ms" or timing) else "" for c in CSV_COLUMNS])
    return buf.getvalue()


def _quartiles(x) -> tuple:
    q1, med, q3 = np.percentile(np.asarray(x, dtype=float), [25, 50, 75])
    return float(q1), float(med), float(q3)


def summarize(rows: list, cfg: ExperimentConfig) -> list:
    groups = []
    for n, s in cfg.sweep_values():
        sel = [r for r in rows if r["n"] == n and r["sigma"] == float(s)]
        g = {"n": n, "sigma": float(s), "snr": sel[0]["snr"] if sel else None, "trials": len(sel)}
        for key in ("tv_error", "l2_error", "vertex_l1_error"):
            q1, med, q3 = _quartiles([r[key] for r in sel])
            g[f"median_{key}"] = med
            g[f"iqr_{key}"] = q3 - q1
        groups.append(g)
    return groups


def _json_safe(obj):
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_json_safe(v) for v in obj]
    return obj


@dataclass
class ExperimentReport:
    rows: list
    groups: list
    csv_path: str
    summary_path: str
    extra: dict = field(default_factory=dict)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run all trials and write ``results.csv`` and ``summary.json`` under ``cfg.out``."""
    os.makedirs(cfg.out, exist_ok=True)
    prov = provenance(cfg.hash_payload(), cfg.seed)
    rows = run_trials(cfg)
    groups = summarize(rows, cfg)
    csv_path = os.path.join(cfg.out, "results.csv")
    with open(csv_path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows, prov, cfg.timing))
    summary = {"schema": SCHEMA, "provenance": prov, "config": cfg.hash_payload(), "sweep_axis": cfg.sweep_axis,
               "groups": groups}
    summary_path = os.path.join(cfg.out, "summary.json")
    dump_json(_json_safe(summary), summary_path)
    return ExperimentReport(rows, groups, csv_path, summary_path)


def find_knee(groups: list, factor: float = 2.0):
    """Scan from the highest SNR down; return the first SNR whose median TV exceeds factor x reference.

    The reference is the sigma = 0 group when present, else the highest-SNR group.
    """
    ordered = sorted(groups, key=lambda g: -g["snr"])
    ref = ordered[0]["median_tv_error"]
    for g in ordered[1:]:
        if g["snr"] == math.inf:
            continue
        if g["median_tv_error"] > factor * ref:
            return g["snr"], ref
    return None, ref


def sweep_phase_transition(cfg: ExperimentConfig) -> ExperimentReport:
    """Sigma sweep; writes the trial CSV, the summary, and ``phase.json`` with the flagged knee."""
    if cfg.sweep_axis != "sigma":
        raise InvalidConfig("the phase sweep needs sigma to be a list")
    report = run_experiment(cfg)
    knee, ref = find_knee(report.groups, cfg.knee_factor)
    lo, hi = math.sqrt(cfg.K) / 4.0, 4.0 * math.sqrt(cfg.K)
    ordered = sorted(report.groups, key=lambda g: g["snr"])
    meds = [g["median_tv_error"] for g in ordered]
    phase = {
        "schema": SCHEMA,
        "provenance": provenance(cfg.hash_payload(), cfg.seed),
        "curve": [{"sigma": g["sigma"], "snr": g["snr"], "median_tv_error": g["median_tv_error"],
                   "iqr_tv_error": g["iqr_tv_error"]} for g in ordered],
        "reference_median": ref,
        "knee_snr": knee,
        "knee_range": [lo, hi],
        "knee_in_range": None if knee is None else bool(lo <= knee <= hi),
        "monotone_in_snr": bool(all(a >= b for a, b in zip(meds, meds[1:]))),
    }
    if knee is not None and not phase["knee_in_range"]:
        phase["warning"] = f"knee at SNR {knee:.3g} outside [{lo:.3g}, {hi:.3g}]"
    path = os.path.join(cfg.out, "phase.json")
    dump_json(_json_safe(phase), path)
    report.extra = phase
    return report
