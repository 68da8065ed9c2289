"""Data generation: y_i = V phi_i + sigma g_i.

Weights phi_i are uniform on the probability simplex (normalized unit-rate
exponentials) and g_i is standard Gaussian. Draws are made in fixed-size
chunks, each with its own Philox sub-stream derived from ``(seed, "chunk",
c)``; any chunk can therefore be regenerated in isolation and a parallel
generator that assigns chunks to workers reproduces the serial output.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import Simplex, check_nondegenerate
from .rng import make_rng

CHUNK = 65536


@dataclass(frozen=True)
class NoisyModel:
    simplex: Simplex
    sigma: float = 0.0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        check_nondegenerate(self.simplex)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def dim(self) -> int:
        return self.simplex.dim

    def to_dict(self) -> dict:
        return {"simplex": self.simplex.to_dict(), "sigma": self.sigma}

    @classmethod
    def from_dict(cls, d: dict) -> "NoisyModel":
        return cls(Simplex.from_dict(d["simplex"]), float(d["sigma"]))


@dataclass
class SampleSet:
    points: np.ndarray
    seed: int
    model_tag: Optional[dict] = field(default=None)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[0] < 1:
            raise ValueError("a SampleSet needs an (n, K) array with n >= 1")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def subset(self, idx) -> "SampleSet":
        return SampleSet(self.points[idx], self.seed, self.model_tag)


def _dirichlet_chunk(rng: np.random.Generator, k_plus_1: int, count: int) -> np.ndarray:
    e = rng.standard_exponential((count, k_plus_1))
    return e / e.sum(axis=1, keepdims=True)


def dirichlet_uniform(k_plus_1: int, count: int, seed: int) -> np.ndarray:
    """``count`` weight vectors drawn uniformly from the (K+1)-simplex."""
    if k_plus_1 < 2 or count < 1:
        raise ValueError("need k_plus_1 >= 2 and count >= 1")
    out = np.empty((count, k_plus_1))
    for c, start in enumerate(range(0, count, CHUNK)):
        stop = min(start + CHUNK, count)
        out[start:stop] = _dirichlet_chunk(make_rng(seed, "dirichlet", c), k_plus_1, stop - start)
    return out


def uniform_points(s: Simplex, count: int, seed: int) -> np.ndarray:
    """Points uniformly distributed on the simplex ``s``."""
    return dirichlet_uniform(s.dim + 1, count, seed) @ s.vertices


def sample_with_weights(model: NoisyModel, n: int, seed: int):
    """Like :func:`sample` but also returns the weights and the noise-free points."""
    if n < 1:
        raise ValueError("n must be >= 1")
    K = model.dim
    V = model.simplex.vertices
    phi = np.empty((n, K + 1))
    g = np.empty((n, K))
    for c, start in enumerate(range(0, n, CHUNK)):
        stop = min(start + CHUNK, n)
        rng = make_rng(seed, "sample", c)
        phi[start:stop] = _dirichlet_chunk(rng, K + 1, stop - start)
        # noise is always drawn so that samples at different sigma share draws
        g[start:stop] = rng.standard_normal((stop - start, K))
    clean = phi @ V
    return clean + model.sigma * g, phi, clean


def sample(model: NoisyModel, n: int, seed: int) -> SampleSet:
    points, _, _ = sample_with_weights(model, n, seed)
    return SampleSet(points, int(seed), {"model": model.to_dict()})


def format_float(x: float) -> str:
    return repr(float(x))


def samples_to_csv(samples: SampleSet) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i}" for i in range(samples.dim)])
    for row in samples.points:
        w.writerow([format_float(v) for v in row])
    return buf.getvalue()


def write_samples(samples: SampleSet, path, sidecar_extra: Optional[dict] = None) -> None:
    """Write ``path`` (CSV) plus ``path + '.json'`` with seed, n and model."""
    with open(path, "w", newline="") as fh:
        fh.write(samples_to_csv(samples))
    meta = {"schema": 1, "seed": samples.seed, "n": samples.n, "model": None}
    if samples.model_tag and "model" in samples.model_tag:
        meta["model"] = samples.model_tag["model"]
    if sidecar_extra:
        meta.update(sidecar_extra)
    with open(str(path) + ".json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_samples(path) -> SampleSet:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if not header or not all(h == f"x{i}" for i, h in enumerate(header)):
        raise ValueError(f"{path}: expected header x0,...,x{{K-1}}")
    points = np.array([[float(v) for v in r] for r in body if r], dtype=float)
    points = points.reshape(-1, len(header))
    seed, tag = 0, None
    try:
        with open(str(path) + ".json") as fh:
            meta = json.load(fh)
        seed = int(meta.get("seed", 0))
        tag = {"model": meta.get("model")}
    except FileNotFoundError:
        pass
    return SampleSet(points, seed, tag)
