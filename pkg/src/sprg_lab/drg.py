"""Perturbation-resilient generator built by packing sPRG output bits.

Coordinate ``i`` of the output is the little-endian integer formed by
sPRG bits ``i*t .. i*t + t - 1``, so each entry lies in ``[0, 2**t - 1]``.
A uniform entry absorbs any shift of magnitude ``<= B`` up to statistical
distance ``B / 2**t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ParameterError
from .sprg import SprgIndex, SprgParams, StructuredSeed, eval_prime, id_samp_prime, sd_samp_prime


def ceil_log2(x: int) -> int:
    if x < 1:
        raise ParameterError(f"log2 of non-positive {x}", field="B_bound")
    return (x - 1).bit_length()


@dataclass(frozen=True)
class DrgParams:
    lam: int
    n: int
    B_bound: int
    tau_prime: float
    m_prime: int
    t_bits: int

    @classmethod
    def derive(cls, lam: int, n: int, B_bound: int, tau_prime: float) -> "DrgParams":
        if B_bound < 1:
            raise ParameterError(f"perturbation bound B must be >= 1, got {B_bound}", field="B_bound")
        if tau_prime <= 0:
            raise ParameterError(f"tau_prime must be positive, got {tau_prime}", field="tau_prime")
        m_prime = math.ceil(n**tau_prime)
        return cls(lam, n, B_bound, float(tau_prime), m_prime, bits_per_coordinate(lam, m_prime, B_bound))

    def to_json(self) -> dict:
        return {"lambda": self.lam, "n": self.n, "B": self.B_bound, "tau_prime": self.tau_prime,
                "m_prime": self.m_prime, "t": self.t_bits}


def bits_per_coordinate(lam: int, m_prime: int, B_bound: int) -> int:
    """``ceil(log2(λ · m' · B))``, computed exactly on integers."""
    return max(1, ceil_log2(lam * m_prime * B_bound))


@dataclass(frozen=True, eq=False)
class DrgIndex:
    sprg: SprgIndex
    params: DrgParams

    @property
    def zeroized(self) -> bool:
        """True when the sPRG has too few output bits to fill every coordinate."""
        return self.sprg.params.m < self.params.m_prime * self.params.t_bits


def drg_setup_poly(sprg_params: SprgParams, B_bound: int, tau_prime: float,
                   rng: np.random.Generator) -> DrgIndex:
    params = DrgParams.derive(sprg_params.lam, sprg_params.n, B_bound, tau_prime)
    return DrgIndex(id_samp_prime(sprg_params, rng), params)


def drg_setup_seed(index: DrgIndex, rng: np.random.Generator, keep_debug: bool = False) -> StructuredSeed:
    return sd_samp_prime(index.sprg, rng, keep_debug=keep_debug)


def pack_bits(z: np.ndarray, m_prime: int, t: int) -> np.ndarray:
    """``y_i = sum_j 2^j z[i*t + j]``; zero vector when ``len(z) < m'·t``."""
    if len(z) < m_prime * t:
        return np.zeros(m_prime, dtype=object if t > 62 else np.int64)
    block = np.asarray(z[:m_prime * t]).reshape(m_prime, t)
    if t > 62:
        return np.array([sum(int(bit) << j for j, bit in enumerate(row)) for row in block], dtype=object)
    return (block.astype(np.int64) << np.arange(t, dtype=np.int64)).sum(axis=1)


def unpack_bits(y: np.ndarray, t: int) -> np.ndarray:
    if y.dtype == object:
        return np.array([(int(v) >> j) & 1 for v in y for j in range(t)], dtype=np.uint8)
    return ((y[:, None] >> np.arange(t, dtype=np.int64)) & 1).astype(np.uint8).ravel()


def drg_eval(index: DrgIndex, sd: StructuredSeed) -> np.ndarray:
    z = eval_prime(index.sprg, sd)
    return pack_bits(z, index.params.m_prime, index.params.t_bits)


def smudging_distance_bound(m_prime: int, B_bound: int, t: int) -> Fraction:
    """Union bound ``m' · B / (2^t - 1)`` on the distance between ``u`` and ``u + β``."""
    return Fraction(m_prime * B_bound, 2**t - 1)


def shift_distance(t: int, beta: int) -> Fraction:
    """Exact statistical distance between ``U[0, 2^t-1]`` and ``U + β``, by enumeration."""
    size = 2**t
    lo, hi = min(0, beta), max(size - 1, size - 1 + beta)
    support = np.arange(lo, hi + 1)
    p = ((support >= 0) & (support < size)).astype(np.int64)
    q = ((support >= beta) & (support < size + beta)).astype(np.int64)
    return Fraction(int(np.abs(p - q).sum()), 2 * size)


def histogram_shift_distance(samples: np.ndarray, beta: int) -> Fraction:
    """Distance between the empirical law of ``samples`` and that of ``samples + β``."""
    samples = np.asarray(samples, dtype=np.int64)
    lo = min(samples.min(), samples.min() + beta)
    hi = max(samples.max(), samples.max() + beta)
    p = np.bincount(samples - lo, minlength=hi - lo + 1)
    q = np.bincount(samples + beta - lo, minlength=hi - lo + 1)
    return Fraction(int(np.abs(p - q).sum()), 2 * len(samples))


def smudging_report(index: DrgIndex, rngs: list[np.random.Generator], beta: int | None = None) -> dict:
    """Pool DRG coordinates over fresh seeds and compare with the analytic bound."""
    prm = index.params
    beta = prm.B_bound if beta is None else beta
    pooled = [drg_eval(index, drg_setup_seed(index, r)) for r in rngs]
    values = np.concatenate(pooled) if pooled else np.zeros(0, np.int64)
    nonzero_trials = sum(int(np.any(v != 0)) for v in pooled)
    return {
        "t": prm.t_bits,
        "B": prm.B_bound,
        "m_prime": prm.m_prime,
        "beta": beta,
        "zeroized": index.zeroized,
        "analytic_bound": float(smudging_distance_bound(prm.m_prime, prm.B_bound, prm.t_bits)),
        "exact_coordinate_sd": float(shift_distance(prm.t_bits, beta)) if prm.t_bits <= 20 else abs(beta) / 2**prm.t_bits,
        "empirical_sd": float(histogram_shift_distance(values, beta)) if len(values) else None,
        "trials": len(rngs),
        "nonzero_trials": nonzero_trials,
    }
