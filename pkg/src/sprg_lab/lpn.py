"""LPN over Z_p and the seed-hiding encoding ``b = s·A + e + σ``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .rng import split
from .zp import PrimeModulus


def integer_root_ceil(n: int, k: int) -> int:
    """Smallest integer ``l`` with ``l**k >= n``."""
    if n <= 1:
        return 1
    lo = max(1, int(round(n ** (1.0 / k))) - 2)
    while lo**k >= n and lo > 1:
        lo -= 1
    while lo**k < n:
        lo += 1
    return lo


@dataclass(frozen=True)
class LpnParams:
    ell: int
    n: int
    delta: float
    p: PrimeModulus
    rate: float | None = None  # defaults to ell ** -delta

    def __post_init__(self):
        if self.ell < 1:
            raise ParameterError(f"ell must be >= 1, got {self.ell}", field="ell")
        if self.n < 1:
            raise ParameterError(f"n must be >= 1, got {self.n}", field="n")
        if not 0.0 < self.delta < 1.0:
            raise ParameterError(f"delta must be in (0, 1), got {self.delta}", field="delta")
        if self.rate is None:
            object.__setattr__(self, "rate", float(self.ell) ** -self.delta)
        if not 0.0 <= self.rate <= 1.0:
            raise ParameterError(f"noise rate must be in [0, 1], got {self.rate}", field="rate")


@dataclass(frozen=True, eq=False)
class LpnInstance:
    A: np.ndarray    # (ell, n)
    s: np.ndarray    # (ell,)
    e: np.ndarray    # (n,)
    b: np.ndarray    # (n,)

    @property
    def err(self) -> np.ndarray:
        """Sorted seed indices carrying nonzero noise."""
        return np.flatnonzero(self.e != 0)


def sample_noise(params: LpnParams, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """D_r(p)^size: each coordinate 0 w.p. 1-r, otherwise uniform in Z_p (0 included)."""
    size = params.n if size is None else size
    hit_rng, val_rng = split(rng, 2)
    hits = hit_rng.random(size) < params.rate
    e = params.p.zeros(size)
    count = int(hits.sum())
    if count:
        e[hits] = params.p.random(val_rng, count)
    return e


def encode(params: LpnParams, sigma, rng: np.random.Generator, A: np.ndarray | None = None) -> LpnInstance:
    """Hide ``sigma`` as ``b = s·A + e + σ``; a fresh ``A`` is drawn unless given."""
    fld = params.p
    sigma = np.asarray(sigma)
    if sigma.shape != (params.n,):
        raise DimensionError(f"sigma has shape {sigma.shape}, expected ({params.n},)")
    a_rng, s_rng, e_rng = split(rng, 3)
    if A is None:
        A = fld.random(a_rng, (params.ell, params.n))
    elif A.shape != (params.ell, params.n):
        raise DimensionError(f"A has shape {A.shape}, expected {(params.ell, params.n)}")
    s = fld.random(s_rng, params.ell)
    e = sample_noise(params, e_rng)
    sA = fld.matmul(s[None, :], A)[0]
    b = fld.add(fld.add(sA, e), fld.array(sigma))
    return LpnInstance(A, s, e, b)


def decode_vectors(fld: PrimeModulus, A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rows ``c_i = (-a_i) || b_i`` so that ``<c_i, s||1> = σ_i + e_i``."""
    return np.concatenate([fld.neg(A.T), b[:, None]], axis=1)
