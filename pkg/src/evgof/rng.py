"""Seed derivation for reproducible Monte Carlo.

Every random stream is a Philox (counter-based) generator keyed by a
``SeedSequence`` whose spawn key is the path of integers leading to it, e.g.
``(master_seed, scenario_key, rep, replicate)``.  Streams are therefore
independent of the order or process in which they are created.
"""
from __future__ import annotations

import hashlib

import numpy as np


def generator(seed: int, *path: int) -> np.random.Generator:
    """Return the generator for ``derive(seed, *path)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def stable_key(text: str) -> int:
    """Map a string to a 63-bit integer that is stable across processes."""
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1
