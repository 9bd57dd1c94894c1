"""Goldreich-style local PRG: a hypergraph of small edges and one predicate.

Output ``j`` applies the predicate to the seed bits on edge ``j``.  The
predicate's unique multilinear polynomial over Z is precomputed once and
lifted to each edge on demand.

Truth tables are integers: bit ``a`` holds ``P(x)`` where ``x_i = (a >> i) & 1``,
so the predicate's first argument is the least significant index bit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import DimensionError, ParameterError
from .zp import PrimeModulus

MAX_LOCALITY = 7


@dataclass(frozen=True)
class Predicate:
    locality: int
    truth_table: int
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if not 1 <= self.locality <= MAX_LOCALITY:
            raise ParameterError(f"locality must be in [1, {MAX_LOCALITY}], got {self.locality}", field="locality")
        if not 0 <= self.truth_table < 1 << (1 << self.locality):
            raise ParameterError("truth table does not fit 2**locality bits", field="truth_table")

    @classmethod
    def from_function(cls, locality: int, fn: Callable[..., int], name: str = "") -> "Predicate":
        table = 0
        for a in range(1 << locality):
            bits = [(a >> i) & 1 for i in range(locality)]
            if fn(*bits) & 1:
                table |= 1 << a
        return cls(locality, table, name)

    @classmethod
    def from_hex(cls, locality: int, hex_table: str) -> "Predicate":
        return cls(locality, int(hex_table, 16))

    @property
    def hex_table(self) -> str:
        digits = max(1, (1 << self.locality) // 4)
        return format(self.truth_table, f"0{digits}x")

    def __call__(self, *bits: int) -> int:
        a = sum((b & 1) << i for i, b in enumerate(bits))
        return (self.truth_table >> a) & 1

    def table_array(self) -> np.ndarray:
        return np.array([(self.truth_table >> a) & 1 for a in range(1 << self.locality)], dtype=np.int64)

    def to_json(self) -> dict:
        return {"locality": self.locality, "truth_table": self.hex_table, "name": self.name}

    @classmethod
    def from_json(cls, obj: dict) -> "Predicate":
        return cls(int(obj["locality"]), int(obj["truth_table"], 16), obj.get("name", ""))

    @cached_property
    def mobius(self) -> dict[int, int]:
        """Multilinear coefficients over Z keyed by variable bitmask (zeros omitted)."""
        return {mask: c for mask, c in enumerate(_mobius(self.table_array())) if c}

    @property
    def degree(self) -> int:
        return max((bin(mask).count("1") for mask in self.mobius), default=0)


def _mobius(values: np.ndarray) -> list[int]:
    """c_S = sum_{T ⊆ S} (-1)^{|S \\ T|} f(T), by the in-place subset transform."""
    c = [int(v) for v in values]
    k = len(c).bit_length() - 1
    for i in range(k):
        bit = 1 << i
        for mask in range(len(c)):
            if mask & bit:
                c[mask] -= c[mask ^ bit]
    return c


def xor(k: int) -> Predicate:
    return Predicate.from_function(k, lambda *x: sum(x) & 1, f"xor{k}")


def and_(k: int) -> Predicate:
    return Predicate.from_function(k, lambda *x: int(all(x)), f"and{k}")


def majority(k: int) -> Predicate:
    return Predicate.from_function(k, lambda *x: int(2 * sum(x) > k), f"maj{k}")


def xor_and() -> Predicate:
    """x1 ^ x2 ^ x3 ^ (x4 & x5): locality 5, multilinear degree 5."""
    return Predicate.from_function(5, lambda a, b, c, d, e: a ^ b ^ c ^ (d & e), "xor-and")


def identity() -> Predicate:
    return Predicate.from_function(1, lambda x: x, "id")


NAMED_PREDICATES: dict[str, Callable[[], Predicate]] = {
    "xor-and": xor_and,
    "id": identity,
    **{f"xor{k}": (lambda k=k: xor(k)) for k in range(2, MAX_LOCALITY + 1)},
    **{f"and{k}": (lambda k=k: and_(k)) for k in range(2, MAX_LOCALITY + 1)},
    "maj3": lambda: majority(3),
    "maj5": lambda: majority(5),
}


def name_of(locality: int, truth_table: int) -> str:
    """Name of the registered predicate with this table, or ``""``."""
    for name, make in NAMED_PREDICATES.items():
        pred = make()
        if pred.locality == locality and pred.truth_table == truth_table:
            return name
    return ""


def predicate_by_name(name: str) -> Predicate:
    try:
        return NAMED_PREDICATES[name]()
    except KeyError:
        raise ParameterError(f"unknown predicate {name!r}; choose from {sorted(NAMED_PREDICATES)}",
                             field="predicate") from None


@dataclass(frozen=True)
class MultilinearPoly:
    """Sparse multilinear polynomial; monomials are sorted index tuples."""

    terms: dict[tuple[int, ...], int]
    p: int | None = None

    @property
    def degree(self) -> int:
        return max((len(v) for v in self.terms), default=0)

    def __call__(self, point) -> int:
        """Evaluate at an integer point (reduced mod p when p is set)."""
        total = 0
        for mono, c in self.terms.items():
            term = c
            for i in mono:
                term *= int(point[i])
            total += term
        return total % self.p if self.p else total

    def support(self) -> set[int]:
        return {i for mono in self.terms for i in mono}


def predicate_to_multilinear(pred: Predicate, p: PrimeModulus | None = None) -> MultilinearPoly:
    """Unique multilinear polynomial of ``pred`` on its local variables 0..k-1."""
    mod = p.p if p is not None else None
    terms = {}
    for mask, c in pred.mobius.items():
        c = c % mod if mod else c
        if c:
            terms[tuple(i for i in range(pred.locality) if mask >> i & 1)] = c
    return MultilinearPoly(terms, mod)


@dataclass(frozen=True, eq=False)
class Hypergraph:
    n: int
    edges: np.ndarray  # (m, locality); rows hold distinct indices < n

    @property
    def m(self) -> int:
        return len(self.edges)

    def __post_init__(self):
        e = self.edges
        if e.ndim != 2:
            raise ParameterError("edges must be a 2-D array", field="edges")
        if e.size and (e.min() < 0 or e.max() >= self.n):
            raise ParameterError("edge index out of range", field="edges")
        s = np.sort(e, axis=1)
        if np.any(s[:, 1:] == s[:, :-1]):
            raise ParameterError("edge with repeated index", field="edges")

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "edges": self.edges.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "Hypergraph":
        edges = np.array(obj["edges"], dtype=np.int64).reshape(int(obj["m"]), -1)
        return cls(int(obj["n"]), edges)


def sample_edges(n: int, m: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """``m`` uniform ordered ``k``-tuples of distinct indices in ``[n]``."""
    if n < k:
        raise ParameterError(f"seed length n={n} is smaller than locality {k}", field="n")
    if n <= 64 or k * k > n:
        keys = rng.random((m, n))
        return np.argsort(keys, axis=1)[:, :k].astype(np.int64)
    edges = rng.integers(0, n, size=(m, k), dtype=np.int64)
    todo = np.arange(m)
    while len(todo):
        s = np.sort(edges[todo], axis=1)
        todo = todo[np.any(s[:, 1:] == s[:, :-1], axis=1)]
        edges[todo] = rng.integers(0, n, size=(len(todo), k), dtype=np.int64)
    return edges


@dataclass(frozen=True, eq=False)
class PrgIndex:
    predicate: Predicate
    hypergraph: Hypergraph

    @property
    def n(self) -> int:
        return self.hypergraph.n

    @property
    def m(self) -> int:
        return self.hypergraph.m

    @property
    def edges(self) -> np.ndarray:
        return self.hypergraph.edges

    @property
    def degree(self) -> int:
        return self.predicate.degree

    @property
    def locality(self) -> int:
        return self.predicate.locality

    def vars(self, j: int) -> tuple[int, ...]:
        return tuple(int(i) for i in self.edges[j])

    def monomial_groups(self):
        """Yield ``(coeff, global_vars)`` per local monomial.

        ``global_vars`` is an ``(m, |monomial|)`` array of seed indices,
        sorted within each row.
        """
        for mask, c in sorted(self.predicate.mobius.items()):
            cols = [i for i in range(self.locality) if mask >> i & 1]
            yield c, np.sort(self.edges[:, cols], axis=1)

    def to_json(self) -> dict:
        return {"predicate": self.predicate.to_json(), "hypergraph": self.hypergraph.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "PrgIndex":
        return cls(Predicate.from_json(obj["predicate"]), Hypergraph.from_json(obj["hypergraph"]))


class NonExpandingWarning(UserWarning):
    """Raised by ``id_samp`` when ``m <= n``; sampling still proceeds."""


def id_samp(n: int, m: int, predicate: Predicate, rng: np.random.Generator) -> PrgIndex:
    if m < 1:
        raise ParameterError(f"output length m must be >= 1, got {m}", field="m")
    if n < predicate.locality:
        raise ParameterError(f"seed length n={n} is smaller than locality {predicate.locality}", field="n")
    if m <= n:
        warnings.warn(f"non-expanding PRG configuration (m={m} <= n={n})", NonExpandingWarning, stacklevel=2)
    return PrgIndex(predicate, Hypergraph(n, sample_edges(n, m, predicate.locality, rng)))


def eval_boolean(index: PrgIndex, sigma) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=np.int64)
    if sigma.shape != (index.n,):
        raise DimensionError(f"seed has length {len(sigma)}, expected {index.n}")
    local = sigma[index.edges] & 1
    addr = (local << np.arange(index.locality)).sum(axis=1)
    return index.predicate.table_array()[addr].astype(np.uint8)


def output_multilinear(index: PrgIndex, j: int, p: PrimeModulus | None = None) -> tuple[MultilinearPoly, tuple[int, ...]]:
    """Polynomial of output ``j`` in global seed variables, and ``Vars_j``."""
    if not 0 <= j < index.m:
        raise DimensionError(f"output index {j} out of range [0, {index.m})")
    local = predicate_to_multilinear(index.predicate, p)
    edge = index.vars(j)
    terms = {tuple(sorted(edge[i] for i in mono)): c for mono, c in local.terms.items()}
    return MultilinearPoly(terms, local.p), edge


def eval_multilinear_field(index: PrgIndex, field: PrimeModulus, x: np.ndarray) -> np.ndarray:
    """All outputs' multilinear polynomials evaluated at a field point ``x``."""
    out = field.zeros(index.m)
    for c, gv in index.monomial_groups():
        term = np.full(index.m, c % field.p, dtype=field.dtype)
        for col in range(gv.shape[1]):
            term = field.mul(term, x[gv[:, col]])
        out = field.add(out, term)
    return out
