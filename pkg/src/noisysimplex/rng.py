"""Seed management.

Every random stream in the package is a Philox-4x64 counter-based generator
(``numpy.random.Philox``) keyed by a 64-bit integer. Sub-streams are derived
from a master seed with a BLAKE2b hash chain over the stage label and any
integer indices, so each stage (and each trial or hypothesis inside a stage)
is reproducible on its own and independent of how many draws other stages
consumed.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *labels) -> int:
    """Hash ``seed`` together with ``labels`` into a new 64-bit seed."""
    h = hashlib.blake2b(digest_size=8)
    h.update(int(seed & _MASK64).to_bytes(8, "little"))
    for label in labels:
        h.update(b"\x1f")
        h.update(str(label).encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def make_rng(seed: int, *labels) -> np.random.Generator:
    """Philox generator for ``seed`` (optionally derived through ``labels``)."""
    key = derive_seed(seed, *labels) if labels else int(seed) & _MASK64
    return np.random.Generator(np.random.Philox(key=key))
