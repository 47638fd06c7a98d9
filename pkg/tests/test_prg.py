import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ameq.bits import BitString
from ameq.gf2m import clmul, field_poly, poly_mod
from ameq.prg import (
    HashFunction,
    NisanSeed,
    PrgStream,
    StreamExhausted,
    TrueRandomSource,
    nisan_expand,
    nisan_params,
    seed_length_for,
)


def seed_from_ints(m, x0, pairs):
    parts = [BitString.from_int(x0, m)]
    for a, b in pairs:
        parts += [BitString.from_int(a, m), BitString.from_int(b, m)]
    return NisanSeed.from_bits(BitString.concat(parts), m, len(pairs))


def affine(a, b, m):
    poly = field_poly(m)
    return lambda x: poly_mod(clmul(a, x), poly) ^ b


# -- hash -----------------------------------------------------------------------------


def test_hash_is_bijection_with_inverse():
    for a in range(1, 16):
        for b in range(16):
            h = HashFunction(a, b, 4)
            assert sorted(h(x) for x in range(16)) == list(range(16))
            assert all(h.inverse(h(x)) == x for x in range(16))


def test_hash_rejects_zero_multiplier():
    with pytest.raises(ValueError):
        HashFunction(0, 3, 4)


def test_pairwise_independence_exhaustive_m4():
    m, q = 4, 16
    expected = 1 / (q * (q - 1))
    hashes = [HashFunction(a, b, m) for a in range(1, q) for b in range(q)]
    for x, xp in itertools.permutations(range(q), 2):
        counts = Counter((h(x), h(xp)) for h in hashes)
        # every (u, v) with u != v is hit exactly once; u == v is impossible for a bijection
        assert len(counts) == q * (q - 1)
        assert all(c / len(hashes) == expected for c in counts.values())


def test_byte_path_matches_scalar(rng):
    for m in (4, 9, 16, 33, 72):
        h = HashFunction(int(rng.integers(1, 1 << min(m, 62))), int(rng.integers(0, 1 << min(m, 62))), m)
        nbytes = (m + 7) // 8
        xs = [int(v) for v in rng.integers(0, 1 << min(m, 62), 20)]
        arr = np.array([list(x.to_bytes(nbytes, "big")) for x in xs], dtype=np.uint8)
        got = [int.from_bytes(row.tobytes(), "big") for row in h.apply_bytes(arr)]
        assert got == [h(x) for x in xs]


# -- generator --------------------------------------------------------------------------


def test_k0_returns_x0():
    s = seed_from_ints(5, 0b10110, [])
    assert nisan_expand(s) == BitString.from_int(0b10110, 5)


def test_k1_identity_hash():
    s = seed_from_ints(4, 0b1011, [(1, 0)])
    assert nisan_expand(s) == BitString.from_str("10111011")


def test_zero_multiplier_replaced_by_one():
    assert seed_from_ints(4, 3, [(0, 5)]).hashes[0].a == 1


def test_k2_hand_unrolled():
    m = 4
    x0, (a1, b1), (a2, b2) = 0b0110, (3, 9), (7, 2)
    h1, h2 = affine(a1, b1, m), affine(a2, b2, m)
    # G_2(x) = G_1(x) . G_1(h2(x)),  G_1(x) = x . h1(x)
    blocks = [x0, h1(x0), h2(x0), h1(h2(x0))]
    expect = BitString.concat([BitString.from_int(v, m) for v in blocks])
    assert nisan_expand(seed_from_ints(m, x0, [(a1, b1), (a2, b2)])) == expect


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 20), st.integers(0, 7), st.integers(0, 2**31 - 1))
def test_recursion_matches_block_and_range_paths(m, k, seed):
    rng = np.random.default_rng(seed)
    s = NisanSeed.random(m, k, rng)
    full = nisan_expand(s).to_array()
    assert full.size == m << k
    assert [s.block(j) for j in range(1 << k)] == [
        BitString.from_array(full[j * m : (j + 1) * m]).to_int() for j in range(1 << k)
    ]
    start = int(rng.integers(0, full.size))
    count = int(rng.integers(0, full.size - start + 1))
    assert np.array_equal(s.bits(start, count), full[start : start + count])


def test_seed_round_trip(rng):
    s = NisanSeed.random(12, 5, rng)
    assert NisanSeed.from_bits(s.to_bits(), 12, 5) == s
    with pytest.raises(ValueError):
        NisanSeed.from_bits(s.to_bits()[:-1], 12, 5)


def test_params_examples():
    assert seed_length_for(16, 1024) == 2632
    assert nisan_params(1, 2) == (4, 0)
    assert seed_length_for(1, 2) == 4
    assert nisan_params(16, 2**14) == (72, 30)


def test_params_cover_requirement_and_monotone():
    prev = 0
    for N in [2**j for j in range(2, 16)]:
        m, k = nisan_params(16, N)
        assert m << k >= (16 * N) ** 2
        assert k == 0 or m << (k - 1) < (16 * N) ** 2
        length = seed_length_for(16, N)
        assert length > prev
        prev = length


# -- stream ----------------------------------------------------------------------------


def test_take_is_sequential_and_deterministic(rng):
    s = NisanSeed.random(16, 10, rng)
    full = nisan_expand(s).to_array()
    a, b = PrgStream.nisan(s), PrgStream.nisan(s)
    parts = [a.take_array(c) for c in (0, 5, 100, 1, 3000)]
    assert np.array_equal(np.concatenate(parts), full[:3106])
    assert np.array_equal(b.take_array(3106), full[:3106])
    assert a.cursor == 3106


def test_stream_exhaustion():
    st_ = PrgStream.nisan(seed_from_ints(4, 1, [(3, 4)]))
    assert st_.capacity == 8
    st_.take_array(6)
    with pytest.raises(StreamExhausted):
        st_.take_array(3)
    assert st_.cursor == 6
    st_.take_array(2)
    with pytest.raises(StreamExhausted):
        st_.take_array(1)


def test_limit_and_peek_skip_read_uint():
    st_ = PrgStream.true_random(5, limit=100)
    peek = st_.peek_array(10).copy()
    val = st_.read_uint(10)
    assert val == int("".join(map(str, peek)), 2)
    st_.skip(80)
    assert st_.remaining == 10
    with pytest.raises(StreamExhausted):
        st_.skip(11)
    assert st_.peek_array(50).size == 10
    assert np.array_equal(st_.fork_view(0, 10), peek)


def test_true_random_is_deterministic_and_chunk_independent():
    a = TrueRandomSource(7).bits(0, 200_000)
    b = TrueRandomSource(7).bits(123_456, 1000)
    assert np.array_equal(a[123_456:124_456], b)
    assert not np.array_equal(a[:1000], TrueRandomSource(8).bits(0, 1000))


@pytest.mark.parametrize("mode", ["nisan", "true"])
def test_statistical_smoke(mode, rng):
    if mode == "nisan":
        m, k = nisan_params(16, 1024)
        stream = PrgStream.nisan(NisanSeed.random(m, k, rng))
    else:
        stream = PrgStream.true_random(99)
    bits = stream.take_array(1 << 21).astype(np.float64)
    assert 0.49 <= bits.mean() <= 0.51
    rho = np.corrcoef(bits[:-1], bits[1:])[0, 1]
    assert abs(rho) < 0.01
