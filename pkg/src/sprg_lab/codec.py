"""Canonical binary layout for field data, indices and seeds.

All integers are little-endian.  A field element occupies
``ceil(bit_length(p) / 8)`` byte limbs; a vector is a ``u32`` count followed
by its elements.  Every file starts with ``b"SPRG"``, a one-byte kind tag
and a one-byte format version.

Seed file::

    header | modulus | b: vec | flag: u8 | s_tensor: vec | B, side, t: u32 | U | V

``U`` and ``V`` are row-major ``(B, side, t)`` and ``(B, t, side)`` element
blocks without their own count prefix.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import SerializationError
from .local_prg import Hypergraph, Predicate, PrgIndex, name_of
from .sprg import SprgIndex, SprgParams, StructuredSeed
from .zp import PrimeModulus

MAGIC = b"SPRG"
VERSION = 1
KIND_PRG, KIND_INDEX, KIND_SEED = b"P", b"I", b"S"
HEADER_BYTES = len(MAGIC) + 2


def encode_elements(field: PrimeModulus, values: np.ndarray) -> bytes:
    w = field.byte_width
    flat = np.asarray(values).ravel()
    if field.small:
        return flat.astype("<u8").view(np.uint8).reshape(-1, 8)[:, :w].tobytes()
    return b"".join(int(v).to_bytes(w, "little") for v in flat)


class Writer:
    def __init__(self, kind: bytes):
        self.parts = [MAGIC, kind, bytes([VERSION])]

    def raw(self, data: bytes) -> None:
        self.parts.append(data)

    def u8(self, v: int) -> None:
        self.parts.append(struct.pack("<B", v))

    def u32(self, v: int) -> None:
        self.parts.append(struct.pack("<I", v))

    def f64(self, v: float) -> None:
        self.parts.append(struct.pack("<d", v))

    def bigint(self, v: int) -> None:
        data = v.to_bytes(max(1, (v.bit_length() + 7) // 8), "little")
        self.parts.append(struct.pack("<H", len(data)) + data)

    def elements(self, field: PrimeModulus, values: np.ndarray) -> None:
        self.parts.append(encode_elements(field, values))

    def vector(self, field: PrimeModulus, values: np.ndarray) -> None:
        self.u32(len(values))
        self.elements(field, values)

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


class Reader:
    def __init__(self, data: bytes, kind: bytes):
        self.data = memoryview(data)
        self.pos = 0
        magic = self.take(len(MAGIC), "magic")
        if bytes(magic) != MAGIC:
            raise SerializationError("bad magic", 0)
        got = bytes(self.take(1, "kind"))
        if got != kind:
            raise SerializationError(f"expected artifact kind {kind!r}, found {got!r}", len(MAGIC))
        version = self.take(1, "version")[0]
        if version != VERSION:
            raise SerializationError(f"unsupported format version {version}", len(MAGIC) + 1)

    def take(self, n: int, what: str) -> memoryview:
        if self.pos + n > len(self.data):
            raise SerializationError(f"truncated while reading {what}", self.pos)
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self, what: str) -> int:
        return self.take(1, what)[0]

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def f64(self, what: str) -> float:
        return struct.unpack("<d", self.take(8, what))[0]

    def bigint(self, what: str) -> int:
        n = struct.unpack("<H", self.take(2, what))[0]
        return int.from_bytes(self.take(n, what), "little")

    def elements(self, field: PrimeModulus, count: int, what: str) -> np.ndarray:
        w = field.byte_width
        start = self.pos
        raw = self.take(count * w, what)
        if field.small:
            buf = np.zeros((count, 8), dtype=np.uint8)
            buf[:, :w] = np.frombuffer(raw, dtype=np.uint8).reshape(count, w)
            vals = buf.view("<u8").ravel().astype(np.int64)
            over = np.flatnonzero(vals >= field.p)
        else:
            vals = np.empty(count, dtype=object)
            vals[:] = [int.from_bytes(raw[i * w:(i + 1) * w], "little") for i in range(count)]
            over = np.flatnonzero(vals >= field.p)
        if len(over):
            raise SerializationError(f"{what}: element {int(over[0])} is not reduced mod p", start + int(over[0]) * w)
        return vals

    def vector(self, field: PrimeModulus, what: str) -> np.ndarray:
        return self.elements(field, self.u32(what + " length"), what)

    def finish(self) -> None:
        if self.pos != len(self.data):
            raise SerializationError("trailing bytes after artifact", self.pos)


# -- PRG index ----------------------------------------------------------

def _write_prg(w: Writer, prg: PrgIndex) -> None:
    pred = prg.predicate
    w.u8(pred.locality)
    w.raw(pred.truth_table.to_bytes(max(1, (1 << pred.locality) // 8), "little"))
    w.u32(prg.n)
    w.u32(prg.m)
    w.raw(prg.edges.astype("<u4").tobytes())


def _read_prg(r: Reader) -> PrgIndex:
    start = r.pos
    k = r.u8("locality")
    table = int.from_bytes(r.take(max(1, (1 << k) // 8), "truth table"), "little") if 1 <= k <= 7 else -1
    n = r.u32("n")
    m = r.u32("m")
    raw = r.take(4 * m * k, "edges")
    edges = np.frombuffer(raw, dtype="<u4").astype(np.int64).reshape(m, k)
    try:
        return PrgIndex(Predicate(k, table, name_of(k, table)), Hypergraph(n, edges))
    except ValueError as exc:
        raise SerializationError(f"invalid PRG index: {exc}", start) from None


def serialize_prg_index(prg: PrgIndex) -> bytes:
    w = Writer(KIND_PRG)
    _write_prg(w, prg)
    return w.getvalue()


def deserialize_prg_index(data: bytes) -> PrgIndex:
    r = Reader(data, KIND_PRG)
    prg = _read_prg(r)
    r.finish()
    return prg


# -- sPRG index -----------------------------------------------------------

def serialize_index(index: SprgIndex) -> bytes:
    p = index.params
    w = Writer(KIND_INDEX)
    w.bigint(p.p.p)
    w.u32(p.lam)
    w.u32(p.t)
    w.f64(p.delta)
    _write_prg(w, index.prg)
    w.raw(index.phi_seed)
    w.u32(p.ell)
    w.elements(p.p, index.A)
    return w.getvalue()


def deserialize_index(data: bytes) -> SprgIndex:
    r = Reader(data, KIND_INDEX)
    field = PrimeModulus(r.bigint("modulus"))
    lam = r.u32("lambda")
    t = r.u32("t_slack")
    delta = r.f64("delta")
    start = r.pos
    prg = _read_prg(r)
    phi_seed = bytes(r.take(32, "phi seed"))
    try:
        params = SprgParams.derive(lam=lam, n=prg.n, m=prg.m, delta=delta, p=field, predicate=prg.predicate, t=t)
    except ValueError as exc:
        raise SerializationError(f"inconsistent parameters: {exc}", start) from None
    ell_pos = r.pos
    ell = r.u32("ell")
    if ell != params.ell:
        raise SerializationError(f"stored ell={ell} disagrees with derived ell={params.ell}", ell_pos)
    A = r.elements(field, ell * prg.n, "A").reshape(ell, prg.n)
    r.finish()
    return SprgIndex(prg, phi_seed, A, params)


# -- seed ---------------------------------------------------------------

def serialize_seed(seed: StructuredSeed, field: PrimeModulus) -> bytes:
    w = Writer(KIND_SEED)
    w.bigint(field.p)
    w.vector(field, seed.b)
    w.u8(seed.flag)
    w.vector(field, seed.s_tensor)
    B, side, t = seed.U.shape
    w.u32(B)
    w.u32(side)
    w.u32(t)
    w.elements(field, seed.U)
    w.elements(field, seed.V)
    return w.getvalue()


def deserialize_seed(data: bytes) -> tuple[StructuredSeed, PrimeModulus]:
    r = Reader(data, KIND_SEED)
    field = PrimeModulus(r.bigint("modulus"))
    b = r.vector(field, "b")
    flag_pos = r.pos
    flag = r.u8("flag")
    if flag not in (0, 1):
        raise SerializationError(f"flag byte must be 0 or 1, got {flag}", flag_pos)
    s_tensor = r.vector(field, "s_tensor")
    B, side, t = r.u32("B"), r.u32("side"), r.u32("t")
    U = r.elements(field, B * side * t, "U").reshape(B, side, t)
    V = r.elements(field, B * t * side, "V").reshape(B, t, side)
    r.finish()
    return StructuredSeed(b, flag, s_tensor, U, V), field


def seed_framing_bits(params: SprgParams) -> dict[str, int]:
    """Bits of a serialized seed that carry no payload, itemized."""
    bl = params.p.bit_length
    w = params.p.byte_width
    p_bytes = max(1, (params.p.p.bit_length() + 7) // 8)
    elements = params.n + params.s_tensor_dim + 2 * params.B * params.side * params.t
    return {
        "header": 8 * HEADER_BYTES,
        "modulus": 8 * (2 + p_bytes),
        "length_prefixes": 8 * 4 * 2,
        "factor_dims": 8 * 4 * 3,
        "flag_padding": 7,
        "limb_padding": (8 * w - bl) * elements,
    }
