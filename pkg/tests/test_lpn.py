from __future__ import annotations

import math

import numpy as np
import pytest

from sprg_lab.errors import DimensionError, ParameterError
from sprg_lab.lpn import LpnParams, decode_vectors, encode, integer_root_ceil, sample_noise
from sprg_lab.zp import PrimeModulus, tensor_power

from conftest import P7, P31


def test_integer_root_ceil():
    for n in range(1, 3000, 7):
        for k in (1, 2, 3, 4):
            r = integer_root_ceil(n, k)
            assert r**k >= n and (r == 1 or (r - 1) ** k < n)


def test_params_validation():
    with pytest.raises(ParameterError) as exc:
        LpnParams(4, 16, 1.0, P31)
    assert exc.value.field == "delta"
    assert LpnParams(16, 16, 0.5, P31).rate == 0.25


def test_zero_rate_noise():
    e = sample_noise(LpnParams(4, 1000, 0.5, P31, rate=0.0), np.random.default_rng(0))
    assert not e.any()


def test_full_rate_noise_nonzero_fraction():
    field = P7
    size = 10**5
    e = sample_noise(LpnParams(4, size, 0.5, field, rate=1.0), np.random.default_rng(1))
    q = 1 - 1 / field.p
    frac = np.count_nonzero(e) / size
    assert abs(frac - q) <= 3 * math.sqrt(q * (1 - q) / size)


def test_partial_rate_noise_fraction():
    field = PrimeModulus(11)
    size = 10**5
    e = sample_noise(LpnParams(4, size, 0.5, field, rate=0.1), np.random.default_rng(2))
    q = 0.1 * (1 - 1 / field.p)
    frac = np.count_nonzero(e) / size
    assert abs(frac - q) <= 3 * math.sqrt(q * (1 - q) / size)


def test_noise_values_uniform_on_support():
    field = PrimeModulus(5)
    e = sample_noise(LpnParams(4, 50000, 0.5, field, rate=1.0), np.random.default_rng(3))
    counts = np.bincount(e, minlength=5)
    assert np.all(np.abs(counts - 10000) < 4 * math.sqrt(10000))


def test_encode_without_noise(rng):
    params = LpnParams(8, 40, 0.5, P31, rate=0.0)
    sigma = rng.integers(0, 2, 40)
    inst = encode(params, sigma, rng)
    assert np.array_equal(P31.sub(inst.b, P31.matmul(inst.s[None, :], inst.A)[0]), sigma)


def test_encode_recomputed_with_python_ints(rng):
    params = LpnParams(6, 25, 0.5, P31)
    sigma = rng.integers(0, 2, 25)
    inst = encode(params, sigma, rng)
    p = P31.p
    for i in range(25):
        expected = (sum(int(inst.s[r]) * int(inst.A[r, i]) for r in range(6)) + int(inst.e[i]) + int(sigma[i])) % p
        assert inst.b[i] == expected
    assert inst.err.tolist() == [i for i in range(25) if inst.e[i] != 0]


def test_decode_vectors(rng):
    params = LpnParams(5, 30, 0.5, P31)
    sigma = rng.integers(0, 2, 30)
    inst = encode(params, sigma, rng)
    C = decode_vectors(P31, inst.A, inst.b)
    s_bar = np.concatenate([inst.s, [1]])
    for i in range(30):
        assert P31.dot(C[i], s_bar) == (int(sigma[i]) + int(inst.e[i])) % P31.p


def test_tensor_decode_pairs(rng):
    params = LpnParams(4, 20, 0.5, P31)
    sigma = rng.integers(0, 2, 20)
    inst = encode(params, sigma, rng)
    C = decode_vectors(P31, inst.A, inst.b)
    s_bar = np.concatenate([inst.s, [1]])
    x = P31.add(sigma, inst.e)
    for i, k in [(0, 1), (3, 17), (5, 5)]:
        lhs = P31.dot(P31.mul(C[i][:, None], C[k][None, :]).ravel(), tensor_power(P31, s_bar, 2))
        assert lhs == int(x[i]) * int(x[k]) % P31.p


def test_encode_rejects_wrong_length(rng):
    with pytest.raises(DimensionError):
        encode(LpnParams(4, 10, 0.5, P31), np.zeros(9, np.int64), rng)
