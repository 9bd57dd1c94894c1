"""Structured-seed PRGs over Z_p built from local PRGs and sparse LPN."""

from __future__ import annotations

from .drg import DrgIndex, DrgParams, drg_eval, drg_setup_poly, drg_setup_seed, pack_bits, unpack_bits
from .errors import (
    DimensionError,
    MalformedForm,
    MalformedSeed,
    MappingViolation,
    ParameterError,
    ParameterTooLarge,
    RankOverflow,
    SerializationError,
    SprgError,
)
from .local_prg import Hypergraph, Predicate, PrgIndex, eval_boolean, id_samp, predicate_to_multilinear
from .lpn import LpnParams, encode, sample_noise
from .rng import Streams
from .sprg import (
    SprgIndex,
    SprgParams,
    StructuredSeed,
    build_g1,
    certify_degree,
    eval_prime,
    id_samp_prime,
    sd_samp_prime,
)
from .zp import PrimeModulus, SparseQuadraticForm, sample_prime

__version__ = "0.1.0"

__all__ = [
    "DrgIndex", "DrgParams", "drg_eval", "drg_setup_poly", "drg_setup_seed", "pack_bits", "unpack_bits",
    "DimensionError", "MalformedForm", "MalformedSeed", "MappingViolation", "ParameterError",
    "ParameterTooLarge", "RankOverflow", "SerializationError", "SprgError",
    "Hypergraph", "Predicate", "PrgIndex", "eval_boolean", "id_samp", "predicate_to_multilinear",
    "LpnParams", "encode", "sample_noise", "Streams",
    "SprgIndex", "SprgParams", "StructuredSeed", "build_g1", "certify_degree", "eval_prime",
    "id_samp_prime", "sd_samp_prime", "PrimeModulus", "SparseQuadraticForm", "sample_prime",
]
