"""Labeled random streams fanned out of one 64-bit seed.

Each label maps to an independent ``SeedSequence`` child, so adding or
reordering draws under one label never shifts the draws of another.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _label_key(label: str) -> int:
    return int.from_bytes(hashlib.sha256(label.encode()).digest()[:4], "little")


class Streams:
    def __init__(self, seed: int):
        if not 0 <= seed < 2**64:
            raise ValueError(f"rng seed must fit in 64 bits, got {seed}")
        self.seed = seed

    def seed_sequence(self, label: str) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.seed, spawn_key=(_label_key(label),))

    def rng(self, label: str) -> np.random.Generator:
        return np.random.default_rng(self.seed_sequence(label))

    def trial_rngs(self, label: str, count: int) -> list[np.random.Generator]:
        return [np.random.default_rng(s) for s in self.seed_sequence(label).spawn(count)]


def split(rng: np.random.Generator, count: int) -> list[np.random.Generator]:
    """Independent child generators; the parent advances by a fixed amount."""
    return list(rng.spawn(count))
