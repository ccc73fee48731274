"""Seed derivation.

Every random stream in the package is derived from one 64-bit seed plus a
tuple of labels, so that subsystems never share state and results do not
depend on execution order.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(seed: int, *labels) -> int:
    h = hashlib.blake2b(digest_size=8)
    h.update((int(seed) & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little"))
    for label in labels:
        h.update(b"\x1f")
        h.update(repr(label).encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def derive_rng(seed: int, *labels) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *labels))
