"""Seed-length accounting, stretch checks and flag-probability estimates.

Bit counts come from the stored dimensions, not asymptotics.  The flag
estimator samples only what the flag depends on (hypergraph, bucket map,
noise support), which makes 10^4-trial runs at m ~ 3·10^4 cheap.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from . import codec
from .local_prg import sample_edges
from .lpn import sample_noise
from .rng import split
from .sprg import SprgParams, bad_outputs, bucket_assignment, conditions_from_loads

CONDITIONS = ("too_many_bad", "bucket_over_capacity", "bucket_too_many_bad")


@dataclass(frozen=True)
class StretchReport:
    bits_P: int
    bits_S1: int
    bits_S2: int
    bits_total: int
    m_bits: int
    n_prime: float
    tau_effective: float | None
    framing_bits: dict

    @property
    def serialized_bits(self) -> int:
        return self.bits_total + sum(self.framing_bits.values())

    def to_json(self) -> dict:
        return asdict(self)


def seed_bit_length(params: SprgParams) -> StretchReport:
    """Payload bits of ``P``, ``S1`` and ``S2``.

    ``n_prime`` divides the total by the ``t^3 · log p`` factor that
    multiplies the correction part; it is reported, not asserted.
    """
    bl = params.p.bit_length
    bits_P = params.n * bl + 1
    bits_S1 = params.s_tensor_dim * bl
    bits_S2 = 2 * params.B * params.t * params.side * bl
    total = bits_P + bits_S1 + bits_S2
    n_prime = total / (params.t**3 * bl)
    tau_eff = math.log(params.m) / math.log(n_prime) if n_prime > 1 and params.m > 1 else None
    return StretchReport(bits_P, bits_S1, bits_S2, total, params.m, n_prime, tau_eff,
                         codec.seed_framing_bits(params))


@dataclass(frozen=True)
class StretchCheck:
    ok: bool
    margin: float
    caveat: bool
    tau: float
    s2_exponent: float
    report: StretchReport

    def to_json(self) -> dict:
        out = asdict(self)
        out["report"] = self.report.to_json()
        return out


def s2_exponent(tau: float, delta: float, d: int) -> float:
    """Exponent of n in the correction-factor size: ``τ - δ / (2 ceil(d/2))``."""
    return tau - delta / (2 * -(-d // 2))


def check_stretch(params: SprgParams) -> StretchCheck:
    """Expanding iff ``m`` exceeds the seed's payload bits.

    ``caveat`` marks the regime where the polynomial-in-λ factors still
    outweigh ``n``, so a negative verdict says nothing about large ``n``.
    """
    rep = seed_bit_length(params)
    tau = math.log(params.m) / math.log(params.n) if params.n > 1 else float("inf")
    margin = params.m / rep.bits_total
    caveat = margin <= 1 or params.t**3 * params.p.bit_length > params.n
    return StretchCheck(margin > 1, margin, caveat, tau, s2_exponent(tau, params.delta, params.d), rep)


def fit_exponent(ns, values) -> float:
    """Least-squares slope of ``log value`` against ``log n``."""
    slope, _ = np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)
    return float(slope)


def expected_bad(params: SprgParams, locality: int | None = None) -> float:
    """Union bound ``locality · r · m`` on ``E|BAD|``."""
    k = params.locality if locality is None else locality
    return k * params.rate * params.m


def exact_expected_bad(params: SprgParams, locality: int | None = None, exclude_zero_draws: bool = False) -> float:
    """``m (1 - (1 - r)^k)``; with ``exclude_zero_draws`` the rate is ``r (1 - 1/p)``."""
    k = params.locality if locality is None else locality
    r = params.rate * (1 - 1 / params.p.p) if exclude_zero_draws else params.rate
    return params.m * (1 - (1 - r) ** k)


def wilson_interval(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    if trials < 2:
        return (0.0, 1.0)
    ci = stats.binomtest(successes, trials).proportion_ci(confidence_level=level, method="wilson")
    return (float(ci.low), float(ci.high))


def flag_trial(params: SprgParams, rng: np.random.Generator) -> tuple[int, dict[str, bool]]:
    """One fresh (hypergraph, bucket map, noise) draw; returns ``|BAD|`` and the conditions."""
    edge_rng, phi_rng, e_rng = split(rng, 3)
    edges = sample_edges(params.n, params.m, params.locality, edge_rng)
    phi_bkt = bucket_assignment(phi_rng.bytes(32), params.m, params.B)
    e = sample_noise(params.lpn, e_rng)
    bad = bad_outputs(edges, params.n, np.flatnonzero(e != 0))
    return len(bad), conditions_from_loads(bad, phi_bkt, np.bincount(phi_bkt, minlength=params.B), params)


def _run_chunk(params: SprgParams, rngs: list[np.random.Generator]):
    return [flag_trial(params, r) for r in rngs]


@dataclass(frozen=True)
class FlagRateReport:
    trials: int
    flag_zero: int
    rate: float
    ci: tuple[float, float]
    condition_counts: dict[str, int]
    bad_sizes: np.ndarray

    @property
    def bad_exceeds_T(self) -> int:
        return self.condition_counts["too_many_bad"]

    def to_json(self) -> dict:
        return {
            "trials": self.trials, "flag_zero": self.flag_zero, "flag_rate": self.rate, "ci": list(self.ci),
            "condition_breakdown": dict(self.condition_counts),
            "mean_bad": float(self.bad_sizes.mean()) if len(self.bad_sizes) else None,
            "max_bad": int(self.bad_sizes.max()) if len(self.bad_sizes) else None,
        }


def estimate_flag_rate(params: SprgParams, trials: int, rng: np.random.Generator, jobs: int = 1,
                       chunk: int = 256) -> FlagRateReport:
    """Empirical ``Pr[flag = 0]`` with a 95% Wilson interval and per-condition counts.

    Each trial has its own child stream, so results do not depend on ``jobs``.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    rngs = split(rng, trials)
    batches = [rngs[i:i + chunk] for i in range(0, trials, chunk)]
    if jobs > 1 and len(batches) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = [r for part in pool.map(_run_chunk, [params] * len(batches), batches) for r in part]
    else:
        results = [r for b in batches for r in _run_chunk(params, b)]
    counts = {c: 0 for c in CONDITIONS}
    zero = 0
    for _, cond in results:
        for c in CONDITIONS:
            counts[c] += int(cond[c])
        zero += int(any(cond.values()))
    sizes = np.array([s for s, _ in results], dtype=np.int64)
    return FlagRateReport(trials, zero, zero / trials, wilson_interval(zero, trials), counts, sizes)


def markov_bound(params: SprgParams, expectation: float | None = None) -> float:
    """``min(1, E|BAD| / T)``."""
    e = exact_expected_bad(params) if expectation is None else expectation
    return 1.0 if params.T == 0 else min(1.0, e / params.T)


def with_n(params: SprgParams, n: int, tau: float) -> SprgParams:
    """Same construction at a different seed length, keeping ``m = ceil(n^τ)``."""
    return SprgParams.derive(lam=params.lam, n=n, m=math.ceil(n**tau), delta=params.delta, p=params.p,
                             predicate=params.predicate, t=params.t)


__all__ = [
    "StretchReport", "StretchCheck", "seed_bit_length", "check_stretch", "s2_exponent", "fit_exponent",
    "expected_bad", "exact_expected_bad", "estimate_flag_rate", "FlagRateReport", "markov_bound",
    "wilson_interval", "flag_trial", "with_n",
]
