"""Structured-seed PRG from LPN over Z_p and a local Boolean PRG.

The index holds the Boolean PRG, the LPN matrix ``A`` and a bucket map.
A seed hides the PRG seed ``σ`` inside ``b = s·A + e + σ`` and carries the
private part ``S = (s̄^{⊗K}, {U_i, V_i})`` with ``s̄ = s || 1`` and
``K = ceil(d/2)``.  Evaluation is a public polynomial that is quadratic in
``S``:

* ``G1_j``: the output polynomial ``L_j`` applied to the decoded values
  ``x_v = <⊗ c_i, ⊗ s̄>``; correct on every output that touches no noisy
  seed position.
* ``G2_j = G1_j + (U V)_{φ(j)}``: adds the per-bucket low-rank correction.
* ``G3_j = flag · G2_j``: zeroizes the output when the seed was rejected.

Monomial split: a monomial ``v`` (sorted) is cut into its first
``ceil(|v|/2)`` indices and the rest; each half becomes one linear form in
``s̄^{⊗K}``, padded with the constant coordinate ``ℓ`` of ``s̄``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import local_prg
from .errors import DimensionError, MalformedSeed, MappingViolation, ParameterError, ParameterTooLarge, RankOverflow
from .local_prg import Predicate, PrgIndex
from .lpn import LpnParams, decode_vectors, encode, integer_root_ceil
from .rng import split
from .zp import TENSOR_CAP, PrimeModulus, SparseQuadraticForm, tensor_power, tensor_rows

#: Cap on the number of field elements held by the correction factors.
SEED_ENTRY_CAP = 2**26
_EVAL_CHUNK = 4096


@dataclass(frozen=True)
class SprgParams:
    """Construction parameters; derived quantities use integer ceilings.

    ``T`` is additionally capped at ``m`` (``|BAD| <= m`` always, so the cap
    does not change the flag).
    """

    lam: int
    n: int
    m: int
    delta: float
    p: PrimeModulus
    predicate: Predicate
    t: int
    ell: int
    T: int
    B: int
    c: int
    rate_override: float | None = None  # noise rate for experiments; sizes still use ell ** delta

    @classmethod
    def derive(cls, *, lam: int, n: int, m: int, delta: float, p: PrimeModulus,
               predicate: Predicate | None = None, t: int | None = None,
               rate: float | None = None) -> "SprgParams":
        predicate = predicate or local_prg.xor_and()
        for name, val in (("lambda", lam), ("n", n), ("m", m)):
            if val < 1:
                raise ParameterError(f"{name} must be >= 1, got {val}", field=name)
        if not 0.0 < delta < 1.0:
            raise ParameterError(f"delta must be in (0, 1), got {delta}", field="delta")
        d = predicate.degree
        if d < 1:
            raise ParameterError("predicate must be non-constant (multilinear degree >= 1)", field="d")
        if n < predicate.locality:
            raise ParameterError(f"n={n} is smaller than the predicate locality {predicate.locality}", field="n")
        t = lam if t is None else t
        if t < 1:
            raise ParameterError(f"t_slack must be >= 1, got {t}", field="t_slack")
        K = -(-d // 2)
        ell = integer_root_ceil(n, K)
        ell_delta = float(ell) ** delta
        T = min(m, math.ceil(m * math.log2(n) / ell_delta))
        B = max(1, math.ceil(m * t / ell_delta))
        c = t * t * math.ceil(ell_delta)
        if rate is not None and not 0.0 <= rate <= 1.0:
            raise ParameterError(f"noise rate must be in [0, 1], got {rate}", field="rate")
        return cls(lam, n, m, float(delta), p, predicate, t, ell, T, B, c, rate)

    @property
    def d(self) -> int:
        return self.predicate.degree

    @property
    def locality(self) -> int:
        return self.predicate.locality

    @property
    def K(self) -> int:
        """Tensor arity ``ceil(d/2)`` of the private seed."""
        return -(-self.d // 2)

    @property
    def side(self) -> int:
        """Side length ``ceil(sqrt(c))`` of each bucket matrix."""
        return math.isqrt(self.c - 1) + 1

    @property
    def rate(self) -> float:
        return float(self.ell) ** -self.delta if self.rate_override is None else self.rate_override

    @property
    def s_tensor_dim(self) -> int:
        return (self.ell + 1) ** self.K

    @property
    def lpn(self) -> LpnParams:
        return LpnParams(self.ell, self.n, self.delta, self.p, self.rate)

    def to_json(self) -> dict:
        return {
            "lambda": self.lam, "n": self.n, "m": self.m, "d": self.d, "delta": self.delta,
            "p": str(self.p.p), "prime_bits": self.p.bit_length, "predicate": self.predicate.to_json(),
            "t_slack": self.t, "ell": self.ell, "T": self.T, "B": self.B, "c": self.c,
            "side": self.side, "rate": self.rate,
        }


@dataclass(frozen=True, eq=False)
class BucketMaps:
    phi_bkt: np.ndarray      # (m,) bucket per output
    phi_ind: np.ndarray      # (m, 2) 0-based (row, col) cell per output
    loads: np.ndarray        # (B,) outputs per bucket
    capacity_exceeded: bool


def bucket_assignment(seed: bytes, m: int, B: int) -> np.ndarray:
    """Pseudorandom ``[m] -> [B]`` expanded from a 32-byte seed with SHAKE-256."""
    raw = hashlib.shake_256(b"sprg-lab/phi_bkt" + seed).digest(8 * m)
    words = np.frombuffer(raw, dtype="<u8")
    return (words % np.uint64(B)).astype(np.int64)


def build_bucket_maps(phi_bkt: np.ndarray, params: SprgParams) -> BucketMaps:
    """Cells are handed out row-major within a bucket, in increasing output order."""
    loads = np.bincount(phi_bkt, minlength=params.B)
    m = len(phi_bkt)
    if loads.max(initial=0) > params.c:
        return BucketMaps(phi_bkt, np.zeros((m, 2), dtype=np.int64), loads, True)
    order = np.argsort(phi_bkt, kind="stable")
    starts = np.concatenate([[0], np.cumsum(loads)[:-1]])
    rank = np.empty(m, dtype=np.int64)
    rank[order] = np.arange(m) - starts[phi_bkt[order]]
    side = params.side
    return BucketMaps(phi_bkt, np.stack([rank // side, rank % side], axis=1), loads, False)


@dataclass(frozen=True, eq=False)
class SprgIndex:
    prg: PrgIndex
    phi_seed: bytes
    A: np.ndarray
    params: SprgParams

    def __post_init__(self):
        if self.A.shape != (self.params.ell, self.params.n):
            raise ParameterError(f"A has shape {self.A.shape}, expected {(self.params.ell, self.params.n)}", field="A")
        if self.prg.m != self.params.m or self.prg.n != self.params.n:
            raise ParameterError("PRG index dimensions disagree with parameters", field="m")

    @property
    def field(self) -> PrimeModulus:
        return self.params.p

    @cached_property
    def bucket_maps(self) -> BucketMaps:
        return build_bucket_maps(bucket_assignment(self.phi_seed, self.params.m, self.params.B), self.params)


@dataclass(frozen=True, eq=False)
class SeedTranscript:
    """Secret intermediate values; only kept for debugging and verification."""

    sigma: np.ndarray
    s: np.ndarray
    e: np.ndarray
    err: np.ndarray
    bad: np.ndarray
    conditions: dict[str, bool]
    corr: np.ndarray
    M: np.ndarray | None   # (B, side, side); None when some bucket is over capacity


@dataclass(frozen=True, eq=False)
class StructuredSeed:
    b: np.ndarray          # public
    flag: int              # public
    s_tensor: np.ndarray   # private, (ell+1)^K
    U: np.ndarray          # private, (B, side, t)
    V: np.ndarray          # private, (B, t, side)
    debug: SeedTranscript | None = field(default=None, repr=False)

    def without_debug(self) -> "StructuredSeed":
        return StructuredSeed(self.b, self.flag, self.s_tensor, self.U, self.V)


# -- index / seed sampling -------------------------------------------------

def id_samp_prime(params: SprgParams, rng: np.random.Generator) -> SprgIndex:
    prg_rng, a_rng, phi_rng = split(rng, 3)
    prg = local_prg.id_samp(params.n, params.m, params.predicate, prg_rng)
    A = params.p.random(a_rng, (params.ell, params.n))
    return SprgIndex(prg, phi_rng.bytes(32), A, params)


def compute_bad_set(prg: PrgIndex, err) -> np.ndarray:
    """Outputs whose edge meets at least one noisy seed index."""
    return bad_outputs(prg.edges, prg.n, err)


def bad_outputs(edges: np.ndarray, n: int, err) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    mask[np.asarray(err, dtype=np.int64)] = True
    return np.flatnonzero(mask[edges].any(axis=1))


def flag_conditions(bad: np.ndarray, maps: BucketMaps, params: SprgParams) -> dict[str, bool]:
    return conditions_from_loads(bad, maps.phi_bkt, maps.loads, params)


def conditions_from_loads(bad: np.ndarray, phi_bkt: np.ndarray, loads: np.ndarray, params: SprgParams) -> dict[str, bool]:
    bad_loads = np.bincount(phi_bkt[bad], minlength=params.B)
    return {
        "too_many_bad": len(bad) > params.T,
        "bucket_over_capacity": bool(loads.max(initial=0) > params.c),
        "bucket_too_many_bad": bool(bad_loads.max(initial=0) > params.t),
    }


def compute_flag(bad: np.ndarray, maps: BucketMaps, params: SprgParams) -> int:
    return 0 if any(flag_conditions(bad, maps, params).values()) else 1


def build_correction(prg: PrgIndex, sigma, e: np.ndarray, maps: BucketMaps,
                     params: SprgParams) -> tuple[np.ndarray, np.ndarray]:
    """``Corr = Eval(σ) - L(σ + e)`` over Z_p, scattered into per-bucket matrices."""
    fld = params.p
    y = fld.array(local_prg.eval_boolean(prg, sigma).astype(np.int64))
    x = fld.add(fld.array(np.asarray(sigma, dtype=np.int64)), e)
    corr = fld.sub(y, local_prg.eval_multilinear_field(prg, fld, x))
    cells = maps.phi_bkt * params.side * params.side + maps.phi_ind[:, 0] * params.side + maps.phi_ind[:, 1]
    if len(np.unique(cells)) != len(cells):
        raise MappingViolation("two outputs share a (bucket, cell) position")
    M = fld.zeros(params.B * params.side * params.side)
    M[cells] = corr
    return corr, M.reshape(params.B, params.side, params.side)


def factorize(field_: PrimeModulus, M: np.ndarray, t: int) -> tuple[np.ndarray, np.ndarray]:
    """``U (r×t)``, ``V (t×r)`` with ``U V = M`` for a matrix with ``<= t`` nonzeros.

    The k-th nonzero in row-major order ``(r, c, v)`` gives ``U[r, k] = v``
    and ``V[k, c] = 1``.
    """
    rows, cols = np.nonzero(M)
    if len(rows) > t:
        raise RankOverflow(f"matrix has {len(rows)} nonzero entries, more than t={t}")
    U = field_.zeros((M.shape[0], t))
    V = field_.zeros((t, M.shape[1]))
    k = np.arange(len(rows))
    U[rows, k] = M[rows, cols]
    V[k, cols] = 1
    return U, V


def factorize_buckets(field_: PrimeModulus, M: np.ndarray, t: int) -> tuple[np.ndarray, np.ndarray]:
    """:func:`factorize` applied to every bucket of a ``(B, r, r)`` stack."""
    nb, r, _ = M.shape
    bkt, rows, cols = np.nonzero(M)
    counts = np.bincount(bkt, minlength=nb)
    if counts.max(initial=0) > t:
        raise RankOverflow(f"bucket {int(counts.argmax())} has {int(counts.max())} nonzero entries, more than t={t}")
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    k = np.arange(len(bkt)) - starts[bkt]
    U = field_.zeros((nb, r, t))
    V = field_.zeros((nb, t, r))
    U[bkt, rows, k] = M[bkt, rows, cols]
    V[bkt, k, cols] = 1
    return U, V


def sd_samp_prime(index: SprgIndex, rng: np.random.Generator, keep_debug: bool = False) -> StructuredSeed:
    params, fld = index.params, index.field
    side, t, B = params.side, params.t, params.B
    if 2 * B * side * t > SEED_ENTRY_CAP:
        raise ParameterTooLarge(f"correction factors would hold {2 * B * side * t} elements", field="m")
    sigma_rng, lpn_rng = split(rng, 2)
    sigma = sigma_rng.integers(0, 2, size=params.n, dtype=np.int64)
    inst = encode(params.lpn, sigma, lpn_rng, A=index.A)
    err = inst.err
    maps = index.bucket_maps
    bad = compute_bad_set(index.prg, err)
    conditions = flag_conditions(bad, maps, params)
    flag = 0 if any(conditions.values()) else 1

    M = None
    if maps.capacity_exceeded:
        y = fld.array(local_prg.eval_boolean(index.prg, sigma).astype(np.int64))
        corr = fld.sub(y, local_prg.eval_multilinear_field(index.prg, fld, fld.add(inst.e, sigma)))
    else:
        corr, M = build_correction(index.prg, sigma, inst.e, maps, params)
    if flag:
        U, V = factorize_buckets(fld, M, t)
    else:
        U, V = fld.zeros((B, side, t)), fld.zeros((B, t, side))

    s_bar = np.concatenate([inst.s, fld.array([1])])
    s_tensor = tensor_power(fld, s_bar, params.K, cap=TENSOR_CAP)
    debug = SeedTranscript(sigma, inst.s, inst.e, err, bad, conditions, corr, M) if keep_debug else None
    return StructuredSeed(inst.b, flag, s_tensor, U, V, debug)


# -- evaluation polynomials -----------------------------------------------

@dataclass(frozen=True, eq=False)
class LinearFactor:
    """Linear form ``sum values[w] * S[idx[w]]``; ``public_degree[w]`` is the b-degree of ``values[w]``."""

    idx: np.ndarray
    values: np.ndarray
    public_degree: np.ndarray


@dataclass(frozen=True, eq=False)
class ProductForm:
    """One output's ``G1``: ``constant + sum coeff * <left, S> * <right, S>``."""

    field: PrimeModulus
    constant: int
    blocks: list[tuple[int, LinearFactor, LinearFactor, int]]  # (coeff, left, right, |v|)

    def evaluate(self, s_tensor: np.ndarray) -> int:
        fld = self.field
        total = self.constant
        for coeff, left, right, _ in self.blocks:
            lv = int(fld.sum(fld.mul(left.values, s_tensor[left.idx])))
            rv = int(fld.sum(fld.mul(right.values, s_tensor[right.idx])))
            total = (total + coeff * lv % fld.p * rv) % fld.p
        return total

    def expand(self) -> SparseQuadraticForm:
        """Explicit term list; every term pairs two private-seed coordinates."""
        fld = self.field
        a, b, c, deg = [], [], [], []
        for coeff, left, right, _ in self.blocks:
            a.append(np.repeat(left.idx, len(right.idx)))
            b.append(np.tile(right.idx, len(left.idx)))
            c.append(fld.mul(coeff, fld.mul(left.values[:, None], right.values[None, :]).ravel()))
            deg.append((left.public_degree[:, None] + right.public_degree[None, :]).ravel())
        if not a:
            return SparseQuadraticForm(fld, np.zeros(0, np.int64), np.zeros(0, np.int64), fld.zeros(0),
                                       self.constant, np.zeros(0, np.int64)).canonical()
        return SparseQuadraticForm(fld, np.concatenate(a), np.concatenate(b), np.concatenate(c),
                                   self.constant, np.concatenate(deg)).canonical()


class G1Forms:
    """The ``m`` factored output forms ``G1_j(b, S)`` of one index and one ``b``."""

    def __init__(self, index: SprgIndex, b: np.ndarray):
        params = index.params
        if np.shape(b) != (params.n,):
            raise DimensionError(f"b has shape {np.shape(b)}, expected ({params.n},)")
        self.index = index
        self.field = index.field
        self.K = params.K
        self.width = params.ell + 1
        self.C = decode_vectors(self.field, index.A, np.asarray(b))   # (n, ell+1)
        self.constant = self.field.zeros(params.m)
        # per monomial group: (coeff mod p, left vars (m, k1), right vars (m, k2))
        self.groups: list[tuple[int, np.ndarray, np.ndarray]] = []
        for coeff, gv in index.prg.monomial_groups():
            c = coeff % self.field.p
            if gv.shape[1] == 0:
                self.constant = self.field.add(self.constant, c)
                continue
            k1 = -(-gv.shape[1] // 2)
            self.groups.append((c, gv[:, :k1], gv[:, k1:]))

    def __len__(self) -> int:
        return self.index.params.m

    def _support(self, k: int) -> np.ndarray:
        pad = self.width ** (self.K - k)
        return np.arange(self.width**k, dtype=np.int64) * pad + (pad - 1)

    def _degrees(self, k: int) -> np.ndarray:
        digits = np.arange(self.width**k, dtype=np.int64)
        deg = np.zeros_like(digits)
        for _ in range(k):
            deg += (digits % self.width) == self.width - 1
            digits //= self.width
        return deg

    def _factor_values(self, vars_: np.ndarray) -> np.ndarray:
        """Row-wise ``⊗_{i in v} c_i`` for a ``(rows, k)`` block of seed indices."""
        return tensor_rows(self.field, [self.C[vars_[:, col]] for col in range(vars_.shape[1])], len(vars_))

    def evaluate(self, s_tensor: np.ndarray) -> np.ndarray:
        """All ``G1_j(b, S)`` at once."""
        fld = self.field
        if len(s_tensor) != self.width**self.K:
            raise MalformedSeed(f"private tensor has length {len(s_tensor)}, expected {self.width ** self.K}")
        out = self.constant.copy()
        m = len(self)
        for coeff, v1, v2 in self.groups:
            s_left = s_tensor[self._support(v1.shape[1])]
            s_right = s_tensor[self._support(v2.shape[1])]
            for lo in range(0, m, _EVAL_CHUNK):
                sl = slice(lo, lo + _EVAL_CHUNK)
                lv = fld.sum(fld.mul(self._factor_values(v1[sl]), s_left[None, :]), axis=1)
                rv = fld.sum(fld.mul(self._factor_values(v2[sl]), s_right[None, :]), axis=1)
                out[sl] = fld.add(out[sl], fld.mul(fld.mul(lv, rv), coeff))
        return out

    def form(self, j: int) -> ProductForm:
        if not 0 <= j < len(self):
            raise DimensionError(f"output index {j} out of range")
        blocks = []
        for coeff, v1, v2 in self.groups:
            factors = []
            for vars_ in (v1[j:j + 1], v2[j:j + 1]):
                k = vars_.shape[1]
                factors.append(LinearFactor(self._support(k), self._factor_values(vars_)[0], self._degrees(k)))
            blocks.append((coeff, factors[0], factors[1], v1.shape[1] + v2.shape[1]))
        return ProductForm(self.field, int(self.constant[j]), blocks)

    def expand(self, j: int) -> SparseQuadraticForm:
        return self.form(j).expand()

    def public_degrees(self) -> np.ndarray:
        """Per output, the largest b-degree of any coefficient of ``G1_j``."""
        deg = np.zeros(len(self), dtype=np.int64)
        for _, v1, v2 in self.groups:
            deg = np.maximum(deg, v1.shape[1] + v2.shape[1])
        return deg


def build_g1(index: SprgIndex, b: np.ndarray) -> G1Forms:
    return G1Forms(index, b)


def _check_seed(index: SprgIndex, sd: StructuredSeed) -> None:
    p = index.params
    expect = {
        "b": (sd.b.shape, (p.n,)),
        "s_tensor": (sd.s_tensor.shape, (p.s_tensor_dim,)),
        "U": (sd.U.shape, (p.B, p.side, p.t)),
        "V": (sd.V.shape, (p.B, p.t, p.side)),
    }
    for name, (got, want) in expect.items():
        if got != want:
            raise MalformedSeed(f"{name} has shape {got}, expected {want}")
    if sd.flag not in (0, 1):
        raise MalformedSeed(f"flag must be 0 or 1, got {sd.flag}")


def correction_terms(index: SprgIndex, sd: StructuredSeed) -> np.ndarray:
    """``(U_{φ_bkt(j)} V_{φ_bkt(j)})_{φ_ind(j)}`` for every output."""
    fld, maps = index.field, index.bucket_maps
    u_rows = sd.U[maps.phi_bkt, maps.phi_ind[:, 0], :]
    v_cols = sd.V[maps.phi_bkt, :, maps.phi_ind[:, 1]]
    return fld.sum(fld.mul(u_rows, v_cols), axis=1)


def eval_prime_field(index: SprgIndex, sd: StructuredSeed, g1: G1Forms | None = None) -> np.ndarray:
    """``G3(P, S)`` as raw field elements."""
    _check_seed(index, sd)
    fld = index.field
    g1 = g1 or build_g1(index, sd.b)
    g2 = fld.add(g1.evaluate(sd.s_tensor), correction_terms(index, sd))
    return fld.mul(g2, sd.flag)


def eval_prime(index: SprgIndex, sd: StructuredSeed) -> np.ndarray:
    z = eval_prime_field(index, sd)
    bad = np.flatnonzero((z != 0) & (z != 1))
    if len(bad):
        raise MalformedSeed(f"output {int(bad[0])} evaluates to a non-Boolean field element")
    return z.astype(np.uint8)


@dataclass(frozen=True)
class DegreeCertificate:
    d: int
    max_private_degree: int
    max_public_degree_g1: int   # in b only
    max_public_degree: int      # including the flag factor
    expanded: bool

    @property
    def ok(self) -> bool:
        return self.max_private_degree <= 2 and self.max_public_degree <= self.d + 1

    def to_json(self) -> dict:
        return {"d": self.d, "max_private_degree": self.max_private_degree,
                "max_public_degree_g1": self.max_public_degree_g1,
                "max_public_degree": self.max_public_degree, "expanded": self.expanded, "ok": self.ok}


def certify_degree(index: SprgIndex, b: np.ndarray, expand: bool = False) -> DegreeCertificate:
    """Degree report for ``G3``.

    Structurally every G1 block is a product of two linear forms in ``S``
    whose coefficients multiply ``|v|`` decode vectors ``c_i``, each affine
    in one entry ``b_i``; the correction adds ``U·V`` (private degree 2,
    public degree 0); the flag multiplies everything by one public variable.
    With ``expand=True`` each output form is materialized and the degrees
    are read off the explicit terms instead.
    """
    g1 = build_g1(index, b)
    if expand:
        priv, pub = 0, 0
        for j in range(len(g1)):
            q = g1.expand(j)
            priv = max(priv, q.private_degree)
            if len(q):
                pub = max(pub, int(q.public_degree.max()))
    else:
        priv = 2 if g1.groups else 0
        pub = int(g1.public_degrees().max(initial=0))
    priv = max(priv, 2)  # the U·V correction term
    return DegreeCertificate(index.params.d, priv, pub, pub + 1, expand)


__all__ = [
    "SprgParams", "BucketMaps", "SprgIndex", "StructuredSeed", "SeedTranscript",
    "id_samp_prime", "sd_samp_prime", "compute_bad_set", "compute_flag", "flag_conditions",
    "build_correction", "factorize", "factorize_buckets", "build_g1", "G1Forms", "ProductForm",
    "eval_prime", "eval_prime_field", "certify_degree", "DegreeCertificate",
]
