import math

import numpy as np
import pytest

from ameq.baselines import (
    eq_deterministic,
    eq_private_mod_prime,
    eq_public_inner,
    first_primes,
    mod_bits,
    naive_direct_sum,
    naive_public_cost,
    prime_table,
    repetitions_for,
)
from ameq.bits import BitString, BlockArray
from ameq.experiments import inner_product_trials, planted_instance


def test_first_primes():
    assert first_primes(10).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert first_primes(1000)[-1] == 7919
    assert first_primes(1)[0] == 2


@pytest.mark.parametrize("value,p", [(0, 7), (255, 2), (12345, 97), (2**70 + 5, 1_000_003)])
def test_mod_bits_horner(value, p):
    assert mod_bits(BitString.from_int(value, 72), p) == value % p


def test_deterministic_examples():
    x = BitString.from_str("1101")
    assert eq_deterministic(x, x)[0] == 1
    bit, tr = eq_deterministic(x, BitString.from_str("1100"))
    assert bit == 0 and tr.total_bits == 5
    bit, tr = eq_deterministic(BitString.from_str("0"), BitString.from_str("1"))
    assert bit == 0 and tr.total_bits == 2


def test_prime_fingerprint_fooling_primes():
    eps = 0.1
    primes = prime_table(8, eps)
    assert primes.size == 80
    x, y = BitString.from_int(17, 8), BitString.from_int(81, 8)
    fooling = [int(p) for p in primes if mod_bits(x, int(p)) == mod_bits(y, int(p))]
    assert fooling == [2]
    rng = np.random.default_rng(0)
    trials = 8000
    errors = sum(eq_private_mod_prime(x, y, eps, rng)[0] for _ in range(trials))
    mu = trials / 80
    assert abs(errors - mu) <= 3 * math.sqrt(trials * (1 / 80) * (79 / 80))


def test_prime_fingerprint_cost_and_one_sidedness(rng):
    eps = 0.01
    P = int(prime_table(64, eps)[-1])
    for _ in range(50):
        x = BitString.random(64, rng)
        bit, tr = eq_private_mod_prime(x, x, eps, rng)
        assert bit == 1
        assert tr.total_bits <= 2 * math.ceil(math.log2(P + 1)) + 1


def test_public_inner_l1_statistics():
    x = BitString.from_str("1011001110001111")
    y = BitString.from_str("1011001110001110")
    trials = 10_000
    wrong = sum(eq_public_inner(x, y, 1, seed)[0] for seed in range(trials))
    assert abs(wrong - trials / 2) <= 3 * math.sqrt(trials / 4)


def test_public_inner_cost_and_equal():
    x = BitString.random(40, np.random.default_rng(3))
    for l in (1, 5, 10):
        bit, tr = eq_public_inner(x, x, l, seed=l)
        assert bit == 1 and tr.total_bits == l + 1


def test_batch_route_matches_protocol():
    rng = np.random.default_rng(4)
    x = BitString.random(16, rng)
    y = x ^ BitString.from_int(1, 16)
    for seed in range(300):
        assert inner_product_trials(x, y, 3, 1, seed) == eq_public_inner(x, y, 3, seed)[0]


def test_public_inner_l10_false_equal_rate():
    x = BitString.from_str("1011001110001111")
    y = BitString.from_str("0011001110001111")
    trials = 10**6
    hits = inner_product_trials(x, y, 10, trials, seed=77)
    p = 2.0**-10
    assert abs(hits - trials * p) <= 3 * math.sqrt(trials * p * (1 - p))


def test_repetitions():
    assert repetitions_for(0.5) == 1
    assert repetitions_for(2**-10) == 10
    with pytest.raises(ValueError):
        repetitions_for(0)


@pytest.mark.parametrize("variant", ["public", "private"])
def test_direct_sum_all_equal(variant, rng):
    X = BlockArray.random(32, 12, rng)
    z, tr = naive_direct_sum(variant, X, X.copy(), 0.01, seed=1)
    assert z == BitString.ones(32)


def test_direct_sum_public_cost_closed_form(rng):
    for N in (4, 64, 256):
        X, Y = planted_instance(16, N, 0.25, rng)
        z, tr = naive_direct_sum("public", X, Y, 1e-6, seed=2)
        assert tr.total_bits == naive_public_cost(N, 1e-6)
        assert np.array_equal(z.to_array().astype(bool), X.equal_mask(Y))


def test_direct_sum_cost_per_block_grows():
    per_N = [naive_public_cost(2**k, 1e-6) / 2**k for k in range(8, 15)]
    assert all(a < b for a, b in zip(per_N, per_N[1:]))


def test_direct_sum_single_block_matches_single_instance():
    x = BitString.from_str("10110")
    X = BlockArray.from_bitstrings([x])
    _, tr = naive_direct_sum("public", X, X.copy(), 2**-7, seed=0)
    _, single = eq_public_inner(x, x, 7, seed=0)
    assert tr.total_bits == single.total_bits == 8


def test_direct_sum_rejects_unknown_variant(rng):
    X = BlockArray.random(4, 4, rng)
    with pytest.raises(ValueError):
        naive_direct_sum("quantum", X, X, 0.1)
