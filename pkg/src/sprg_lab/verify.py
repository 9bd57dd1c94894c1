"""Correctness checks over an (index, seed) pair, optionally with its debug transcript."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import local_prg
from .errors import MalformedSeed
from .sprg import (
    SprgIndex,
    StructuredSeed,
    build_correction,
    build_g1,
    certify_degree,
    compute_bad_set,
    compute_flag,
    correction_terms,
    eval_prime_field,
)
from .zp import tensor_power

SCHEMA = "sprg-lab/v1"


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class VerifyReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(ok), detail))
        return bool(ok)

    def get(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)

    def to_json(self) -> dict:
        return {"schema": SCHEMA, "ok": self.ok,
                "checks": [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in self.checks]}


@dataclass(frozen=True, eq=False)
class Transcript:
    """Secret values needed to re-derive everything else about a seed."""

    sigma: np.ndarray
    s: np.ndarray
    e: np.ndarray

    @classmethod
    def from_json(cls, obj: dict, index: SprgIndex) -> "Transcript":
        fld = index.field
        return cls(np.array(obj["sigma"], dtype=np.int64), fld.array(obj["s"]), fld.array(obj["e"]))


def transcript_json(index: SprgIndex, sd: StructuredSeed, rng_seed: int | None = None, config: dict | None = None) -> dict:
    dbg = sd.debug
    if dbg is None:
        raise ValueError("seed was sampled without keep_debug")
    loads = index.bucket_maps.loads
    return {
        "schema": SCHEMA,
        "rng_seed": rng_seed,
        "config": config,
        "flag": sd.flag,
        "conditions": dbg.conditions,
        "err_size": int(len(dbg.err)),
        "bad_size": int(len(dbg.bad)),
        "bucket_histogram": {str(k): int(v) for k, v in enumerate(np.bincount(loads)) if v},
        "sigma": [int(x) for x in dbg.sigma],
        "s": [int(x) for x in dbg.s],
        "e": [int(x) for x in dbg.e],
    }


def _first(idx: np.ndarray, limit: int = 5) -> str:
    return ", ".join(str(int(i)) for i in idx[:limit]) + (" ..." if len(idx) > limit else "")


def verify(index: SprgIndex, sd: StructuredSeed, transcript: Transcript | None = None,
           expand_degree: bool = False) -> VerifyReport:
    rep = VerifyReport()
    fld, params, maps = index.field, index.params, index.bucket_maps
    try:
        z = eval_prime_field(index, sd)
    except MalformedSeed as exc:
        rep.add("seed_shape", False, str(exc))
        return rep
    rep.add("seed_shape", True)

    if maps.capacity_exceeded:
        rep.add("phi_ind_injective", True, "bucket over capacity; constant cell map")
    else:
        cells = maps.phi_bkt * params.side**2 + maps.phi_ind[:, 0] * params.side + maps.phi_ind[:, 1]
        rep.add("phi_ind_injective", len(np.unique(cells)) == params.m)

    non_bool = np.flatnonzero((z != 0) & (z != 1))
    rep.add("outputs_boolean", len(non_bool) == 0, f"non-Boolean outputs: {_first(non_bool)}" if len(non_bool) else "")

    cert = certify_degree(index, sd.b, expand=expand_degree)
    rep.add("degree_certificate", cert.ok,
            f"private degree {cert.max_private_degree}, public degree {cert.max_public_degree} (d={cert.d})")

    if sd.flag == 0:
        rep.add("zero_factors_when_rejected", not np.any(sd.U) and not np.any(sd.V))

    if transcript is None:
        return rep

    sigma, s, e = transcript.sigma, transcript.s, transcript.e
    sA = fld.matmul(s[None, :], index.A)[0]
    rep.add("lpn_encoding", np.array_equal(fld.sub(fld.sub(sd.b, sA), e), fld.array(sigma)))
    s_bar = np.concatenate([s, fld.array([1])])
    rep.add("private_tensor", np.array_equal(tensor_power(fld, s_bar, params.K), sd.s_tensor))

    bad = compute_bad_set(index.prg, np.flatnonzero(e != 0))
    rep.add("flag_consistent", compute_flag(bad, maps, params) == sd.flag)

    y = local_prg.eval_boolean(index.prg, sigma).astype(np.int64)
    wrong = np.flatnonzero(z != sd.flag * y)
    rep.add("eval_equals_flag_times_prg", len(wrong) == 0, f"mismatched outputs: {_first(wrong)}" if len(wrong) else "")

    good = np.setdiff1d(np.arange(params.m), bad)
    g1 = build_g1(index, sd.b).evaluate(sd.s_tensor)
    off = good[g1[good] != y[good]]
    rep.add("good_output_agreement", len(off) == 0, f"good outputs off: {_first(off)}" if len(off) else "")

    if sd.flag == 1:
        _, M = build_correction(index.prg, sigma, e, maps, params)
        UV = fld.matmul(sd.U, sd.V)
        failing = np.flatnonzero(np.any(UV != M, axis=(1, 2)))
        rep.add("factorization", len(failing) == 0,
                f"U_i V_i != M_i for buckets: {_first(failing)}" if len(failing) else "")
        corr = correction_terms(index, sd)
        rep.add("correction_matches", np.array_equal(fld.sub(fld.array(y), g1), corr))
    return rep
