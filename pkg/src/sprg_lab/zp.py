"""Exact arithmetic over a prime field Z_p.

Field vectors and matrices are plain numpy arrays holding canonical
representatives in ``[0, p)``.  Moduli below 2**31 use ``int64`` storage
(products of two residues fit in 62 bits); larger moduli fall back to
``object`` arrays of Python ints.  Every operation reduces eagerly.

Tensor powers are flattened row-major: the entry for the multi-index
``(j1, ..., jk)`` sits at ``sum(j_t * dim**(k - t))``, so the first factor
is the most significant digit.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
import sympy

from .errors import DimensionError, MalformedForm, ParameterError, ParameterTooLarge

#: Default hard cap on the number of entries of a tensor power.
TENSOR_CAP = 2**24

#: Sentinel second index of a linear term in a :class:`SparseQuadraticForm`.
CONST = -1

_SMALL = 2**31
_LIMB = 16
# With residues < 2**31 and a 16-bit limb every product is < 2**47, so up
# to 2**16 of them can be summed in int64 without overflow.
_MAX_INNER = 2**16


@dataclass(frozen=True)
class PrimeModulus:
    p: int

    def __post_init__(self):
        if self.p < 2:
            raise ParameterError(f"modulus {self.p} is not prime", field="p")

    @property
    def bit_length(self) -> int:
        # ceil(log2 p) == p.bit_length() for any p that is not a power of two
        return int(self.p).bit_length()

    @property
    def byte_width(self) -> int:
        return (self.bit_length + 7) // 8

    @property
    def small(self) -> bool:
        return self.p < _SMALL

    @property
    def dtype(self):
        return np.int64 if self.small else object

    # -- construction -------------------------------------------------

    def array(self, values) -> np.ndarray:
        """Reduce arbitrary integers (possibly negative) into field storage."""
        if self.small:
            arr = np.asarray(values)
            if arr.dtype == object:
                arr = np.array([int(x) % self.p for x in arr.ravel()], dtype=np.int64).reshape(arr.shape)
                return arr
            return np.mod(arr.astype(np.int64, copy=False), self.p)
        arr = np.asarray(values, dtype=object)
        out = np.empty(arr.shape, dtype=object)
        flat_in, flat_out = arr.ravel(), out.ravel()
        for i in range(flat_in.size):
            flat_out[i] = int(flat_in[i]) % self.p
        return out

    def zeros(self, shape) -> np.ndarray:
        if self.small:
            return np.zeros(shape, dtype=np.int64)
        out = np.empty(shape, dtype=object)
        out.fill(0)
        return out

    def random(self, rng: np.random.Generator, shape) -> np.ndarray:
        """Uniform field elements."""
        if self.small:
            return rng.integers(0, self.p, size=shape, dtype=np.int64)
        size = int(np.prod(shape, dtype=np.int64))
        nbytes = self.byte_width + 8  # 64 extra bits keep the mod-p bias negligible
        raw = rng.bytes(nbytes * size)
        vals = [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") % self.p for i in range(size)]
        out = np.empty(size, dtype=object)
        out[:] = vals
        return out.reshape(shape)

    # -- element-wise -------------------------------------------------

    def add(self, a, b) -> np.ndarray:
        return np.mod(np.add(a, b), self.p)

    def sub(self, a, b) -> np.ndarray:
        return np.mod(np.subtract(a, b), self.p)

    def neg(self, a) -> np.ndarray:
        return np.mod(np.negative(a), self.p)

    def mul(self, a, b) -> np.ndarray:
        return np.mod(np.multiply(a, b), self.p)

    def sum(self, a, axis=None) -> np.ndarray:
        """Sum of residues along ``axis``, reduced.

        For int64 storage the caller must keep the summed length below 2**32.
        """
        total = np.sum(a, axis=axis)
        if isinstance(total, np.ndarray):
            return np.mod(total, self.p)
        return np.int64(total % self.p) if self.small else int(total) % self.p

    # -- products -----------------------------------------------------

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Exact ``a @ b mod p``; supports stacked (batched) operands."""
        if a.shape[-1] != b.shape[-2 if b.ndim > 1 else 0]:
            raise DimensionError(f"cannot multiply shapes {a.shape} and {b.shape}")
        if not self.small:
            return np.mod(np.matmul(a, b), self.p)
        inner = a.shape[-1]
        if inner > _MAX_INNER:
            acc = None
            for lo in range(0, inner, _MAX_INNER):
                part = self.matmul(a[..., lo:lo + _MAX_INNER],
                                   b[..., lo:lo + _MAX_INNER, :] if b.ndim > 1 else b[lo:lo + _MAX_INNER])
                acc = part if acc is None else self.add(acc, part)
            return acc
        b_lo = b & (2**_LIMB - 1)
        b_hi = b >> _LIMB
        lo = np.mod(np.matmul(a, b_lo), self.p)
        hi = np.mod(np.matmul(a, b_hi), self.p)
        return np.mod(lo + np.mod(hi * 2**_LIMB, self.p), self.p)

    def dot(self, u: np.ndarray, v: np.ndarray) -> int:
        if u.shape != v.shape or u.ndim != 1:
            raise DimensionError(f"inner product of shapes {u.shape} and {v.shape}")
        return int(self.matmul(u[None, :], v[:, None])[0, 0])


def mat_mul(field: PrimeModulus, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError("mat_mul expects two matrices")
    return field.matmul(a, b)


def inner_product(field: PrimeModulus, u: np.ndarray, v: np.ndarray) -> int:
    return field.dot(np.asarray(u), np.asarray(v))


def is_probable_prime(n: int) -> bool:
    # sympy uses BPSW (deterministic below 2**64; no known pseudoprime above)
    return bool(sympy.isprime(n))


def sample_prime(bits: int, rng: np.random.Generator) -> PrimeModulus:
    """Uniformly random prime with exactly ``bits`` bits."""
    if bits < 8:
        raise ParameterError(f"prime bits must be >= 8, got {bits}", field="prime_bits")
    nbytes = (bits + 7) // 8
    top = 1 << (bits - 1)
    while True:
        cand = int.from_bytes(rng.bytes(nbytes), "little") % top
        cand |= top | 1
        if is_probable_prime(cand):
            return PrimeModulus(cand)


def tensor_power(field: PrimeModulus, v: np.ndarray, k: int, cap: int = TENSOR_CAP) -> np.ndarray:
    """``v^{⊗k}`` flattened row-major."""
    if k < 1:
        raise ParameterError(f"tensor power needs k >= 1, got {k}", field="k")
    v = np.asarray(v)
    if v.ndim != 1:
        raise DimensionError("tensor_power expects a vector")
    if len(v) ** k > cap:
        raise ParameterTooLarge(f"tensor power of dimension {len(v)}**{k} exceeds cap {cap}", field="k")
    out = v
    for _ in range(k - 1):
        out = field.mul(out[:, None], v[None, :]).ravel()
    return out


def tensor_rows(field: PrimeModulus, factors: list[np.ndarray], rows: int) -> np.ndarray:
    """Row-wise tensor product of a list of ``(rows, w_i)`` matrices.

    An empty list yields the ``(rows, 1)`` all-ones matrix.
    """
    out = np.ones((rows, 1), dtype=field.dtype)
    for f in factors:
        out = field.mul(out[:, :, None], f[:, None, :]).reshape(rows, -1)
    return out


@dataclass(frozen=True)
class SparseQuadraticForm:
    """``sum coeff * s[a] * s[b] + sum coeff * s[a] + constant`` over Z_p.

    Terms are stored column-wise.  ``idx_b == CONST`` marks a linear term.
    ``public_degree`` optionally records, per term, the degree of its
    coefficient as a polynomial in the public seed.
    """

    field: PrimeModulus
    idx_a: np.ndarray
    idx_b: np.ndarray
    coeff: np.ndarray
    constant: int = 0
    public_degree: np.ndarray | None = None
    _canonical: bool = dc_field(default=False, repr=False, compare=False)

    @classmethod
    def from_terms(cls, fld: PrimeModulus, terms, constant: int = 0) -> "SparseQuadraticForm":
        terms = list(terms)
        a = np.array([t[0] for t in terms], dtype=np.int64)
        b = np.array([t[1] for t in terms], dtype=np.int64)
        c = fld.array([t[2] for t in terms]) if terms else fld.zeros(0)
        return cls(fld, a, b, c, int(constant) % fld.p).canonical()

    def __len__(self) -> int:
        return len(self.idx_a)

    @property
    def terms(self) -> list[tuple[int, int, int]]:
        return [(int(a), int(b), int(c)) for a, b, c in zip(self.idx_a, self.idx_b, self.coeff)]

    @property
    def private_degree(self) -> int:
        if len(self) == 0:
            return 0
        return 2 if np.any(self.idx_b != CONST) else 1

    def canonical(self) -> "SparseQuadraticForm":
        """Order each pair as ``a <= b``, merge duplicates, drop zero terms."""
        if self._canonical:
            return self
        a, b = self.idx_a.astype(np.int64), self.idx_b.astype(np.int64)
        lin = b == CONST
        lo = np.where(lin, a, np.minimum(a, b))
        hi = np.where(lin, CONST, np.maximum(a, b))
        deg = self.public_degree
        if len(a) == 0:
            return SparseQuadraticForm(self.field, lo, hi, self.field.zeros(0), self.constant,
                                       None if deg is None else np.zeros(0, np.int64), True)
        keys = np.stack([lo, hi], axis=1)
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        coeff = self.field.zeros(len(uniq))
        np.add.at(coeff, inverse, self.coeff)
        coeff = np.mod(coeff, self.field.p)
        new_deg = None
        if deg is not None:
            new_deg = np.zeros(len(uniq), dtype=np.int64)
            np.maximum.at(new_deg, inverse, deg)
        keep = coeff != 0
        return SparseQuadraticForm(
            self.field, uniq[keep, 0], uniq[keep, 1], coeff[keep], self.constant,
            None if new_deg is None else new_deg[keep], True,
        )


def eval_quadratic(q: SparseQuadraticForm, s_vec: np.ndarray) -> int:
    fld = q.field
    s_vec = np.asarray(s_vec)
    dim = len(s_vec)
    if len(q):
        if q.idx_a.min() < 0 or q.idx_a.max() >= dim:
            raise MalformedForm(f"first index out of range for seed of length {dim}")
        quad = q.idx_b != CONST
        if np.any(quad) and (q.idx_b[quad].min() < 0 or q.idx_b[quad].max() >= dim):
            raise MalformedForm(f"second index out of range for seed of length {dim}")
        if np.any((q.idx_b < 0) & (q.idx_b != CONST)):
            raise MalformedForm("negative second index")
    else:
        return int(q.constant) % fld.p
    left = s_vec[q.idx_a]
    right = np.where(q.idx_b == CONST, 1, s_vec[np.where(q.idx_b == CONST, 0, q.idx_b)])
    if not fld.small:
        right = right.astype(object)
    prods = fld.mul(fld.mul(q.coeff, left), right)
    total = 0
    # chunk so int64 partial sums never exceed 2**63
    for lo in range(0, len(prods), 2**31):
        total = (total + int(fld.sum(prods[lo:lo + 2**31]))) % fld.p
    return (total + int(q.constant)) % fld.p
