"""Nisan generator over affine hashes, and a common random-stream interface.

The generator is ``G_0(x) = x`` and ``G_i(x) = G_{i-1}(x) || G_{i-1}(h_i(x))``
with ``h_i(x) = a_i x + b_i`` over GF(2^m).  Output block ``j`` (``m`` bits)
is obtained by applying ``h_s`` for every set bit ``s - 1`` of ``j``, from the
top bit down, so any range of blocks can be produced without expanding the
whole tree.

Seed layout on the wire: ``x0, a_1, b_1, ..., a_k, b_k``, each ``m`` bits,
big-endian.  A zero ``a`` is read as 1 so every hash is a bijection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bits import BitString
from .gf2m import clmul, field_poly, poly_mod

DEFAULT_SEED_CONSTANT = 4


class StreamExhausted(Exception):
    """More bits were requested than the stream can deliver."""


@dataclass(frozen=True)
class HashFunction:
    """``h(x) = a x + b`` in GF(2^m); ``a`` must be nonzero."""

    a: int
    b: int
    m: int

    def __post_init__(self):
        size = 1 << self.m
        if not 0 < self.a < size or not 0 <= self.b < size:
            raise ValueError("hash coefficients out of range (a must be nonzero)")

    def __call__(self, x: int) -> int:
        return poly_mod(clmul(self.a, x), field_poly(self.m)) ^ self.b

    def inverse(self, y: int) -> int:
        poly = field_poly(self.m)
        inv, base, e = 1, self.a, (1 << self.m) - 2
        while e:
            if e & 1:
                inv = poly_mod(clmul(inv, base), poly)
            base = poly_mod(clmul(base, base), poly)
            e >>= 1
        return poly_mod(clmul(inv, y ^ self.b), poly)

    @cached_property
    def _byte_tables(self) -> np.ndarray:
        """``(nbytes, 256, nbytes)`` tables for ``a * x`` in byte representation."""
        nbytes = (self.m + 7) // 8
        poly = field_poly(self.m)
        # a * X^i for every bit of the byte representation
        basis = []
        cur = self.a
        for _ in range(8 * nbytes):
            basis.append(cur)
            cur <<= 1
            if cur >> self.m:
                cur ^= poly
        basis_bytes = np.array(
            [list(v.to_bytes(nbytes, "big")) for v in basis], dtype=np.uint8
        )
        tables = np.zeros((nbytes, 256, nbytes), dtype=np.uint8)
        for q in range(nbytes):
            low = 8 * (nbytes - 1 - q)  # bit weight of the byte's LSB
            t = tables[q]
            for bit in range(8):
                t[1 << bit : 2 << bit] = t[: 1 << bit] ^ basis_bytes[low + bit]
        tables.flags.writeable = False
        return tables

    @cached_property
    def _b_bytes(self) -> np.ndarray:
        return np.frombuffer(self.b.to_bytes((self.m + 7) // 8, "big"), dtype=np.uint8)

    def apply_bytes(self, x: np.ndarray) -> np.ndarray:
        """Apply to a ``(count, nbytes)`` array of big-endian elements."""
        tables = self._byte_tables
        out = np.broadcast_to(self._b_bytes, x.shape).copy()
        for q in range(x.shape[1]):
            out ^= tables[q][x[:, q]]
        return out


def nisan_params(n: int, N: int, c: int = DEFAULT_SEED_CONSTANT) -> tuple[int, int]:
    """Block width ``m`` and depth ``k`` sized for ``R = n^2 N^2`` output bits."""
    if n < 1 or N < 1:
        raise ValueError("n and N must be positive")
    m = c * max(1, math.ceil(math.log2(n * N)))
    R = (n * N) ** 2
    k = 0
    while m << k < R:
        k += 1
    return m, k


def seed_length_for(n: int, N: int, c: int = DEFAULT_SEED_CONSTANT) -> int:
    """Bits of seed the main protocol draws: ``m (2k + 1)``."""
    m, k = nisan_params(n, N, c)
    return m * (2 * k + 1)


@dataclass(frozen=True)
class NisanSeed:
    x0: int
    hashes: tuple[HashFunction, ...]
    m: int

    @property
    def k(self) -> int:
        return len(self.hashes)

    @property
    def bit_length(self) -> int:
        return self.m * (2 * self.k + 1)

    @property
    def output_length(self) -> int:
        return self.m << self.k

    @classmethod
    def from_bits(cls, bits: BitString, m: int, k: int) -> "NisanSeed":
        if len(bits) != m * (2 * k + 1):
            raise ValueError(f"seed must have {m * (2 * k + 1)} bits, got {len(bits)}")
        vals = [bits[i * m : (i + 1) * m].to_int() for i in range(2 * k + 1)]
        hashes = tuple(
            HashFunction(vals[1 + 2 * i] or 1, vals[2 + 2 * i], m) for i in range(k)
        )
        return cls(vals[0], hashes, m)

    @classmethod
    def random(cls, m: int, k: int, rng: np.random.Generator) -> "NisanSeed":
        return cls.from_bits(BitString.random(m * (2 * k + 1), rng), m, k)

    def to_bits(self) -> BitString:
        parts = [BitString.from_int(self.x0, self.m)]
        for h in self.hashes:
            parts += [BitString.from_int(h.a, self.m), BitString.from_int(h.b, self.m)]
        return BitString.concat(parts)

    def block(self, j: int) -> int:
        """Output block ``j`` as a field element (scalar reference path)."""
        if not 0 <= j < 1 << self.k:
            raise IndexError(f"block {j} out of range")
        x = self.x0
        for s in range(self.k, 0, -1):
            if (j >> (s - 1)) & 1:
                x = self.hashes[s - 1](x)
        return x

    def blocks_bytes(self, lo: int, hi: int) -> np.ndarray:
        """Blocks ``lo .. hi-1`` as a ``(hi - lo, nbytes)`` big-endian array."""
        if not 0 <= lo <= hi <= 1 << self.k:
            raise IndexError("block range out of bounds")
        nbytes = (self.m + 7) // 8
        if lo == hi:
            return np.zeros((0, nbytes), dtype=np.uint8)
        vals = np.frombuffer(self.x0.to_bytes(nbytes, "big"), dtype=np.uint8)[None, :]
        plo = 0
        for d in range(self.k):
            shift = self.k - d - 1
            clo, chi = lo >> shift, (hi - 1) >> shift
            children = np.arange(clo, chi + 1)
            nxt = vals[(children >> 1) - plo]
            odd = (children & 1).astype(bool)
            if odd.any():
                nxt = nxt.copy()
                nxt[odd] = self.hashes[self.k - d - 1].apply_bytes(nxt[odd])
            vals, plo = nxt, clo
        return vals

    def bits(self, start: int, count: int) -> np.ndarray:
        """Unpacked output bits ``start .. start+count-1``."""
        if count == 0:
            return np.zeros(0, dtype=np.uint8)
        m = self.m
        lo, hi = start // m, (start + count + m - 1) // m
        raw = self.blocks_bytes(lo, hi)
        pad = raw.shape[1] * 8 - m
        unpacked = np.unpackbits(raw, axis=1)[:, pad:].reshape(-1)
        off = start - lo * m
        return unpacked[off : off + count]


def nisan_expand(seed: NisanSeed) -> BitString:
    """Full output ``G_k(x0)`` of ``2^k m`` bits, built by the recursion."""

    def expand(x: int, level: int) -> list[int]:
        if level == 0:
            return [x]
        return expand(x, level - 1) + expand(seed.hashes[level - 1](x), level - 1)

    if seed.output_length > 1 << 24:
        raise ValueError("full expansion too large; use PrgStream for lazy access")
    return BitString.concat([BitString.from_int(v, seed.m) for v in expand(seed.x0, seed.k)])


# -- streams ----------------------------------------------------------------------


class NisanSource:
    """Random-access bits of a Nisan expansion."""

    def __init__(self, seed: NisanSeed):
        self.seed = seed
        self.capacity = seed.output_length

    def bits(self, start: int, count: int) -> np.ndarray:
        return self.seed.bits(start, count)


class TrueRandomSource:
    """Seeded uniform bits, addressable by position.

    Bits are generated in fixed chunks from ``default_rng([seed, chunk])``,
    so any window can be regenerated independently of read history.
    """

    CHUNK_BYTES = 1 << 16

    def __init__(self, seed: int, capacity: int | None = None):
        self.seed = int(seed)
        self.capacity = capacity if capacity is not None else 1 << 62
        self._cache: tuple[int, np.ndarray] | None = None

    def _chunk(self, idx: int) -> np.ndarray:
        if self._cache is None or self._cache[0] != idx:
            rng = np.random.default_rng([self.seed, idx])
            raw = rng.integers(0, 256, size=self.CHUNK_BYTES, dtype=np.uint8)
            self._cache = (idx, np.unpackbits(raw))
        return self._cache[1]

    def bits(self, start: int, count: int) -> np.ndarray:
        size = self.CHUNK_BYTES * 8
        out = []
        pos, end = start, start + count
        while pos < end:
            idx, off = divmod(pos, size)
            take = min(size - off, end - pos)
            out.append(self._chunk(idx)[off : off + take])
            pos += take
        return np.concatenate(out) if out else np.zeros(0, dtype=np.uint8)


class PrgStream:
    """Sequential reader over a bit source with a hard budget.

    Parameters
    ----------
    source : NisanSource | TrueRandomSource
    limit : int, optional
        Maximum bits that may be read; defaults to the source capacity.
    """

    BUFFER_BITS = 1 << 20

    def __init__(self, source, limit: int | None = None):
        self.source = source
        cap = source.capacity
        self.capacity = cap if limit is None else min(cap, int(limit))
        self.cursor = 0
        self._buf = np.zeros(0, dtype=np.uint8)
        self._buf_start = 0

    @classmethod
    def nisan(cls, seed: NisanSeed, limit: int | None = None) -> "PrgStream":
        return cls(NisanSource(seed), limit)

    @classmethod
    def true_random(cls, seed: int, limit: int | None = None) -> "PrgStream":
        return cls(TrueRandomSource(seed), limit)

    @property
    def remaining(self) -> int:
        return self.capacity - self.cursor

    def take_array(self, count: int) -> np.ndarray:
        """Next ``count`` bits as an unpacked uint8 array."""
        if count < 0:
            raise ValueError("count must be non-negative")
        if self.cursor + count > self.capacity:
            raise StreamExhausted(
                f"requested {count} bits at offset {self.cursor}, capacity {self.capacity}"
            )
        end = self.cursor + count
        buf_end = self._buf_start + self._buf.size
        if end > buf_end:
            fetch = min(max(count, self.BUFFER_BITS), self.capacity - self.cursor)
            self._buf = self.source.bits(self.cursor, fetch)
            self._buf_start = self.cursor
        off = self.cursor - self._buf_start
        out = self._buf[off : off + count]
        self.cursor = end
        return out

    def peek_array(self, count: int) -> np.ndarray:
        """Up to ``count`` upcoming bits, without advancing."""
        count = min(count, self.remaining)
        saved = self.cursor
        out = self.take_array(count)
        self.cursor = saved
        return out

    def skip(self, count: int) -> None:
        if self.cursor + count > self.capacity:
            raise StreamExhausted(f"cannot skip {count} bits at offset {self.cursor}")
        self.cursor += count

    def take(self, count: int) -> BitString:
        return BitString.from_array(self.take_array(count))

    def read_uint(self, width: int) -> int:
        if width == 0:
            return 0
        bits = self.take_array(width)
        return int(np.packbits(bits, bitorder="big").tobytes().hex() or "0", 16) >> (
            (-width) % 8
        )

    def fork_view(self, start: int, count: int) -> np.ndarray:
        """Bits ``start .. start+count-1`` without moving the cursor."""
        if start + count > self.capacity:
            raise StreamExhausted("view past capacity")
        return self.source.bits(start, count)


def stream_take(stream: PrgStream, count: int) -> BitString:
    return stream.take(count)
