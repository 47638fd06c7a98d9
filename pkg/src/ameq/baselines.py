"""Single-instance equality protocols and their blockwise direct sums.

Every protocol ends with Bob sending his one-bit verdict, so both parties
hold the answer.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np

from .bits import BitString, BlockArray, row_parities
from .channel import recv, run, send
from .prg import PrgStream

MAX_PRIMES = 10**7


@lru_cache(maxsize=8)
def first_primes(count: int) -> np.ndarray:
    """The first ``count`` primes by a sieve of Eratosthenes."""
    if count < 1:
        raise ValueError("count must be positive")
    if count > MAX_PRIMES:
        warnings.warn(f"prime table capped at {MAX_PRIMES} entries", stacklevel=2)
        count = MAX_PRIMES
    if count < 6:
        limit = 15
    else:
        lk = math.log(count)
        limit = int(count * (lk + math.log(lk))) + 1
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    primes = np.flatnonzero(sieve)[:count]
    primes.flags.writeable = False
    return primes


def mod_bits(x: BitString, p: int) -> int:
    """``int(x) mod p`` by Horner's rule over the bits of ``x``."""
    r = 0
    for b in x.to_array().tolist():
        r = (2 * r + b) % p
    return r


def _verdict(bit: int) -> BitString:
    return BitString.from_int(bit, 1)


# -- deterministic ------------------------------------------------------------------


def det_alice(x: BitString):
    yield send(x, "eq/x")
    verdict = yield recv()
    return verdict[0]


def det_bob(y: BitString):
    x = yield recv()
    if len(x) != len(y):
        raise ValueError("input lengths differ")
    answer = int(x == y)
    yield send(_verdict(answer), "eq/verdict")
    return answer


def eq_deterministic(x: BitString, y: BitString):
    """Alice sends ``x``; Bob answers.  Cost ``n + 1``."""
    tr = run(det_alice(x), det_bob(y))
    return tr.outcome_bob, tr


# -- private coin, fingerprint mod a random prime -------------------------------------


def prime_table(n: int, epsilon: float) -> np.ndarray:
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    return first_primes(math.ceil(n / epsilon))


def prime_alice(x: BitString, epsilon: float, rng: np.random.Generator):
    primes = prime_table(len(x), epsilon)
    width = int(primes[-1]).bit_length()
    p = int(primes[rng.integers(primes.size)])
    msg = BitString.from_int(p, width) + BitString.from_int(mod_bits(x, p), width)
    yield send(msg, "eq/fingerprint")
    verdict = yield recv()
    return verdict[0]


def prime_bob(y: BitString, epsilon: float):
    primes = prime_table(len(y), epsilon)
    width = int(primes[-1]).bit_length()
    msg = yield recv()
    p, residue = msg[:width].to_int(), msg[width:].to_int()
    answer = int(mod_bits(y, p) == residue)
    yield send(_verdict(answer), "eq/verdict")
    return answer


def eq_private_mod_prime(x: BitString, y: BitString, epsilon: float, rng: np.random.Generator):
    """Alice sends a random prime from the first ``ceil(n/eps)`` and ``x mod p``."""
    tr = run(prime_alice(x, epsilon, rng), prime_bob(y, epsilon))
    return tr.outcome_bob, tr


# -- public coin, inner products -----------------------------------------------------------


def repetitions_for(epsilon: float) -> int:
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    return math.ceil(math.log2(1 / epsilon))


def _inner_bits(x: BitString, l: int, stream: PrgStream) -> np.ndarray:
    r = stream.take_array(l * len(x)).reshape(l, len(x))
    return (r.astype(np.int64) @ x.to_array().astype(np.int64) & 1).astype(np.uint8)


def inner_alice(x: BitString, l: int, stream: PrgStream):
    yield send(BitString.from_array(_inner_bits(x, l, stream)), "eq/inner")
    verdict = yield recv()
    return verdict[0]


def inner_bob(y: BitString, l: int, stream: PrgStream):
    msg = yield recv()
    answer = int(np.array_equal(msg.to_array(), _inner_bits(y, l, stream)))
    yield send(_verdict(answer), "eq/verdict")
    return answer


def eq_public_inner(x: BitString, y: BitString, l: int, seed: int):
    """``l`` shared random inner products.  Cost ``l + 1``."""
    if l < 1:
        raise ValueError("l must be at least 1")
    tr = run(
        inner_alice(x, l, PrgStream.true_random(seed)),
        inner_bob(y, l, PrgStream.true_random(seed)),
    )
    return tr.outcome_bob, tr


# -- naive direct sums ------------------------------------------------------------------------


def _block_parities(blocks: BlockArray, l: int, stream: PrgStream) -> np.ndarray:
    N, n = blocks.block_count, blocks.block_len
    r = stream.take_array(N * l * n).reshape(N, l, n)
    packed_r = np.packbits(r, axis=-1)
    return row_parities(packed_r, blocks.packed[:, None, :])


def naive_public_alice(X: BlockArray, l: int, stream: PrgStream):
    yield send(BitString.from_array(_block_parities(X, l, stream).reshape(-1)), "naive/inner")
    verdicts = yield recv()
    return verdicts


def naive_public_bob(Y: BlockArray, l: int, stream: PrgStream):
    msg = yield recv()
    theirs = msg.to_array().reshape(Y.block_count, l)
    mine = _block_parities(Y, l, stream)
    answer = BitString.from_array(np.all(theirs == mine, axis=1))
    yield send(answer, "naive/verdict")
    return answer


def naive_private_alice(X: BlockArray, epsilon: float, rng: np.random.Generator):
    N, n = X.block_count, X.block_len
    primes = prime_table(n, epsilon / N)
    width = int(primes[-1]).bit_length()
    parts = []
    for x in X:
        p = int(primes[rng.integers(primes.size)])
        parts += [BitString.from_int(p, width), BitString.from_int(mod_bits(x, p), width)]
    yield send(BitString.concat(parts), "naive/fingerprint")
    verdicts = yield recv()
    return verdicts


def naive_private_bob(Y: BlockArray, epsilon: float):
    N, n = Y.block_count, Y.block_len
    primes = prime_table(n, epsilon / N)
    width = int(primes[-1]).bit_length()
    msg = yield recv()
    out = []
    for b, y in enumerate(Y):
        off = 2 * width * b
        p = msg[off : off + width].to_int()
        residue = msg[off + width : off + 2 * width].to_int()
        out.append(int(mod_bits(y, p) == residue))
    answer = BitString.from_bits(out)
    yield send(answer, "naive/verdict")
    return answer


def naive_direct_sum(
    variant: str,
    X: BlockArray,
    Y: BlockArray,
    epsilon: float,
    seed: int = 0,
    max_bits: int | None = None,
):
    """Blockwise baseline at per-block error ``epsilon / N``.

    ``variant`` is ``"public"`` (shared stream from ``seed``) or
    ``"private"`` (Alice's own generator from ``seed``).  Returns the answer
    vector and the transcript.
    """
    if X.bits.shape != Y.bits.shape:
        raise ValueError("block arrays differ in shape")
    N = X.block_count
    if variant == "public":
        l = repetitions_for(epsilon / N)
        alice = naive_public_alice(X, l, PrgStream.true_random(seed))
        bob = naive_public_bob(Y, l, PrgStream.true_random(seed))
    elif variant == "private":
        alice = naive_private_alice(X, epsilon, np.random.default_rng(seed))
        bob = naive_private_bob(Y, epsilon)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    tr = run(alice, bob, max_bits)
    return tr.outcome_bob, tr


def naive_public_cost(N: int, epsilon: float) -> int:
    """Closed-form bits of the public blockwise baseline."""
    return N * (repetitions_for(epsilon / N) + 1)

