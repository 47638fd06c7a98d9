"""String synchronisation over the channel.

``orlitsky_*``: one syndrome message from Alice, one reply from Bob.  Bob
decodes the syndrome difference into the difference pattern ``D = A xor B``
and answers with ``D`` as a list of positions or, when shorter, with his own
syndrome.  Alice then decodes the same ``D``.

``smith_*``: both parties permute their strings with a shared random
permutation, cut them into chunks of ``chunk_len`` bits, and reconcile every
chunk with the syndrome scheme above at capacity ``ceil(p L (1 + gamma))``.
All chunks travel in a single message each way.

Per-chunk wire layout
---------------------
forward (Alice -> Bob)
    BCH mode: leader syndromes, ``m`` bits each, ascending leaders.
    raw mode: the chunk itself.
reply (Bob -> Alice), preceded once per sync by a status bit (1 = decoded)
    mode bit 0: ``count`` then ``count`` positions.  BCH mode uses
    ``ceil(log2(t_dec + 1))`` bits for the count, raw mode
    ``ceil(log2(L + 1))``; positions use ``ceil(log2 L)`` bits.
    mode bit 1: Bob's syndromes (BCH mode) or Bob's chunk (raw mode).

Raw mode is used when the capacity makes the BCH code degenerate or its
syndromes would not be shorter than the chunk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bch import BchCode, DecodeFailure
from .bits import BitString
from .channel import recv, send
from .gf2m import TABLE_MAX_M
from .prg import PrgStream

DEFAULT_CHUNK_LEN = 127
DEFAULT_GAMMA = 1.0

SUCCESS = "success"
FAILURE = "failure_detected"


@dataclass
class SyncResult:
    """Outcome at one party."""

    peer_string: BitString | None
    bits_used: int
    status: str

    @property
    def ok(self) -> bool:
        return self.status == SUCCESS


@dataclass(frozen=True)
class ChunkLayout:
    length: int
    t: int
    code: BchCode | None

    @property
    def raw(self) -> bool:
        return self.code is None

    @property
    def forward_bits(self) -> int:
        return self.length if self.code is None else self.code.syndrome_bits

    @property
    def count_width(self) -> int:
        cap = self.length if self.code is None else self.code.t_dec
        return cap.bit_length()

    @property
    def pos_width(self) -> int:
        return (self.length - 1).bit_length()


@lru_cache(maxsize=4096)
def chunk_layout(length: int, t: int) -> ChunkLayout:
    """Code choice for reconciling ``length`` bits at distance ``<= t``."""
    if length < 0:
        raise ValueError("length must be non-negative")
    t = max(t, 1)
    m = max(4, length.bit_length())
    if m > TABLE_MAX_M or t >= 1 << (m - 1):
        return ChunkLayout(length, t, None)
    try:
        code = BchCode(m, t, length=length)
    except ValueError:
        return ChunkLayout(length, t, None)
    if code.syndrome_bits >= length:
        return ChunkLayout(length, t, None)
    return ChunkLayout(length, t, code)


# -- bit helpers -------------------------------------------------------------------


def _uint_bits(value: int, width: int) -> np.ndarray:
    if width == 0:
        return np.zeros(0, dtype=np.uint8)
    return ((value >> np.arange(width - 1, -1, -1)) & 1).astype(np.uint8)


class _Reader:
    def __init__(self, bits: BitString):
        self.arr = bits.to_array()
        self.pos = 0

    def take(self, count: int) -> np.ndarray:
        if self.pos + count > self.arr.size:
            raise ValueError("message shorter than its layout")
        out = self.arr[self.pos : self.pos + count]
        self.pos += count
        return out

    def uint(self, width: int) -> int:
        val = 0
        for b in self.take(width).tolist():
            val = (val << 1) | b
        return val

    def uints(self, count: int, width: int) -> np.ndarray:
        if width == 0:
            return np.zeros(count, dtype=np.int64)
        mat = self.take(count * width).reshape(count, width).astype(np.int64)
        return mat @ (1 << np.arange(width - 1, -1, -1, dtype=np.int64))

    def done(self) -> bool:
        return self.pos == self.arr.size


# -- per-chunk pieces ----------------------------------------------------------------


def _forward_messages(layout: ChunkLayout, chunks: np.ndarray) -> np.ndarray:
    """Forward payload per chunk, ``(count, forward_bits)``."""
    if layout.raw:
        return chunks
    code = layout.code
    if layout.length <= 4096:
        return code.syndrome_bits_batch(chunks)
    rows = [
        code.pack_syndromes(code.leader_syndromes(BitString.from_array(c))).to_array()
        for c in chunks
    ]
    return np.stack(rows)


def _leader_values(layout: ChunkLayout, fwd: np.ndarray) -> np.ndarray:
    """Forward payload rows back to leader syndromes, ``(count, leaders)``."""
    m = layout.code.m
    mat = fwd.reshape(fwd.shape[0], -1, m).astype(np.int64)
    return mat @ (1 << np.arange(m - 1, -1, -1, dtype=np.int64))


def _diff_positions(layout: ChunkLayout, own_fwd: np.ndarray, peer_fwd: np.ndarray) -> list:
    """Difference patterns per chunk, or None where decoding fails."""
    if layout.raw:
        return [np.flatnonzero(a != b) for a, b in zip(own_fwd, peer_fwd)]
    code = layout.code
    diff = _leader_values(layout, own_fwd) ^ _leader_values(layout, peer_fwd)
    out = []
    for row in diff:
        if not row.any():
            out.append(np.zeros(0, dtype=np.int64))
            continue
        try:
            out.append(code.decode_positions(code.expand(row)))
        except DecodeFailure:
            out.append(None)
    return out


def _reply_chunk(layout: ChunkLayout, positions: np.ndarray, own_fwd_row: np.ndarray) -> np.ndarray:
    pos_cost = layout.count_width + positions.size * layout.pos_width
    if pos_cost <= layout.forward_bits:
        parts = [np.array([0], dtype=np.uint8), _uint_bits(positions.size, layout.count_width)]
        if positions.size and layout.pos_width:
            shifts = np.arange(layout.pos_width - 1, -1, -1)
            parts.append(((positions[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1))
        return np.concatenate(parts)
    return np.concatenate([np.array([1], dtype=np.uint8), own_fwd_row])


def _read_reply_chunk(layout: ChunkLayout, reader: _Reader, own_fwd_row: np.ndarray):
    """Difference positions announced by Bob, or None on an inconsistent reply."""
    mode = reader.uint(1)
    if mode == 0:
        count = reader.uint(layout.count_width)
        return reader.uints(count, layout.pos_width)
    peer = reader.take(layout.forward_bits)
    return _diff_positions(layout, own_fwd_row[None, :], peer[None, :])[0]


# -- chunked engine shared by both protocols ------------------------------------------


def _chunk_plan(n: int, chunk_len: int, capacity) -> list[tuple[int, int, ChunkLayout]]:
    plan = []
    for start in range(0, n, chunk_len):
        length = min(chunk_len, n - start)
        plan.append((start, length, chunk_layout(length, capacity(length))))
    return plan


def _group(plan):
    groups: dict[ChunkLayout, list[int]] = {}
    for idx, (_, _, layout) in enumerate(plan):
        groups.setdefault(layout, []).append(idx)
    return groups


def _chunk_rows(arr: np.ndarray, plan, idxs) -> np.ndarray:
    return np.stack([arr[plan[i][0] : plan[i][0] + plan[i][1]] for i in idxs])


def _forward_all(arr: np.ndarray, plan) -> list[np.ndarray]:
    rows: list[np.ndarray] = [None] * len(plan)
    for layout, idxs in _group(plan).items():
        fwd = _forward_messages(layout, _chunk_rows(arr, plan, idxs))
        for i, row in zip(idxs, fwd):
            rows[i] = row
    return rows


def _alice_side(A: np.ndarray, plan, tag: str):
    fwd = _forward_all(A, plan)
    msg = BitString.from_array(np.concatenate(fwd)) if fwd else BitString.zeros(0)
    yield send(msg, tag)
    reply = yield recv()
    used = len(msg) + len(reply)
    reader = _Reader(reply)
    if reader.uint(1) == 0:
        return None, used
    diff = np.zeros(A.size, dtype=np.uint8)
    for (start, _, layout), row in zip(plan, fwd):
        pos = _read_reply_chunk(layout, reader, row)
        if pos is None:
            return None, used
        diff[start + pos] = 1
    if not reader.done():
        raise ValueError("trailing bits in sync reply")
    return A ^ diff, used


def _bob_side(B: np.ndarray, plan, tag: str):
    msg = yield recv()
    own = _forward_all(B, plan)
    reader = _Reader(msg)
    peer = [reader.take(layout.forward_bits) for (_, _, layout) in plan]
    diff = np.zeros(B.size, dtype=np.uint8)
    parts = [np.array([1], dtype=np.uint8)]
    failed = False
    for layout, idxs in _group(plan).items():
        positions = _diff_positions(
            layout, np.stack([own[i] for i in idxs]), np.stack([peer[i] for i in idxs])
        )
        for i, pos in zip(idxs, positions):
            if pos is None:
                failed = True
                break
            diff[plan[i][0] + pos] = 1
        if failed:
            break
    if failed:
        reply = BitString.from_array(np.array([0], dtype=np.uint8))
        yield send(reply, tag)
        return None, len(msg) + 1
    for i, (start, length, layout) in enumerate(plan):
        pos = np.flatnonzero(diff[start : start + length])
        parts.append(_reply_chunk(layout, pos, own[i]))
    reply = BitString.from_array(np.concatenate(parts))
    yield send(reply, tag)
    return B ^ diff, len(msg) + len(reply)


def _result(arr, used, perm=None) -> SyncResult:
    if arr is None:
        return SyncResult(None, used, FAILURE)
    if perm is not None:
        out = np.empty_like(arr)
        out[perm] = arr
        arr = out
    return SyncResult(BitString.from_array(arr), used, SUCCESS)


# -- Orlitsky ----------------------------------------------------------------------------


def orlitsky_alice(A: BitString, e: int, tag: str = "sync"):
    """Alice's side; returns a SyncResult holding Bob's string."""
    plan = _chunk_plan(len(A), max(len(A), 1), lambda _: e)
    arr, used = yield from _alice_side(A.to_array(), plan, tag)
    return _result(arr, used)


def orlitsky_bob(B: BitString, e: int, tag: str = "sync"):
    plan = _chunk_plan(len(B), max(len(B), 1), lambda _: e)
    arr, used = yield from _bob_side(B.to_array(), plan, tag)
    return _result(arr, used)


def orlitsky_cost_bound(length: int, e: int) -> int:
    """Worst-case total bits of one Orlitsky exchange."""
    layout = chunk_layout(length, e)
    return 2 + 2 * layout.forward_bits


# -- Smith-style ------------------------------------------------------------------------


def shared_permutation(n: int, stream: PrgStream) -> np.ndarray:
    """Fisher-Yates permutation of ``range(n)`` drawn from ``stream``.

    The draw for position ``i`` reads ``ceil(log2(i + 1))`` bits and rejects
    values above ``i``.  Both parties consume the stream identically.
    """
    perm = list(range(n))
    i = n - 1
    while i > 0:
        width = (i).bit_length()
        # every i sharing this width reads values of the same size
        low = 1 << (width - 1)
        while i >= low and i > 0:
            want = 2 * (i - low + 1) + 8
            bits = stream.peek_array(want * width)
            if bits.size < width:
                stream.take_array(width)  # raises StreamExhausted
            vals = bits[: (bits.size // width) * width].reshape(-1, width).astype(np.int64)
            vals = (vals @ (1 << np.arange(width - 1, -1, -1, dtype=np.int64))).tolist()
            used = 0
            for v in vals:
                used += 1
                if v <= i:
                    perm[i], perm[v] = perm[v], perm[i]
                    i -= 1
                    if i < low or i == 0:
                        break
            stream.skip(used * width)
    return np.array(perm, dtype=np.int64)


def smith_capacity(p: float, length: int, gamma: float) -> int:
    return math.ceil(p * length * (1 + gamma))


def _smith_plan(n: int, e: int, chunk_len: int, gamma: float):
    p = min(e / n, 1.0) if n else 0.0
    if n <= chunk_len:
        chunk_len = max(n, 1)
    return _chunk_plan(n, chunk_len, lambda length: smith_capacity(p, length, gamma))


def _smith_perm(n: int, plan, stream: PrgStream, permute: bool):
    if not permute or len(plan) <= 1:
        return None
    return shared_permutation(n, stream)


def smith_alice(
    A: BitString,
    e: int,
    stream: PrgStream,
    chunk_len: int = DEFAULT_CHUNK_LEN,
    gamma: float = DEFAULT_GAMMA,
    permute: bool = True,
    tag: str = "sync",
):
    plan = _smith_plan(len(A), e, chunk_len, gamma)
    perm = _smith_perm(len(A), plan, stream, permute)
    arr = A.to_array() if perm is None else A.to_array()[perm]
    out, used = yield from _alice_side(arr, plan, tag)
    return _result(out, used, perm)


def smith_bob(
    B: BitString,
    e: int,
    stream: PrgStream,
    chunk_len: int = DEFAULT_CHUNK_LEN,
    gamma: float = DEFAULT_GAMMA,
    permute: bool = True,
    tag: str = "sync",
):
    plan = _smith_plan(len(B), e, chunk_len, gamma)
    perm = _smith_perm(len(B), plan, stream, permute)
    arr = B.to_array() if perm is None else B.to_array()[perm]
    out, used = yield from _bob_side(arr, plan, tag)
    return _result(out, used, perm)


# -- standalone runners ----------------------------------------------------------------


def orlitsky_sync(A: BitString, B: BitString, e: int):
    """Run the exchange on a fresh channel; returns (alice, bob, transcript)."""
    from .channel import run

    tr = run(orlitsky_alice(A, e), orlitsky_bob(B, e))
    return tr.outcome_alice, tr.outcome_bob, tr


def smith_sync(
    A: BitString,
    B: BitString,
    e: int,
    seed: int = 0,
    chunk_len: int = DEFAULT_CHUNK_LEN,
    gamma: float = DEFAULT_GAMMA,
    permute: bool = True,
):
    """Run the chunked exchange with shared randomness from ``seed``."""
    from .channel import run

    sa, sb = PrgStream.true_random(seed), PrgStream.true_random(seed)
    tr = run(
        smith_alice(A, e, sa, chunk_len, gamma, permute),
        smith_bob(B, e, sb, chunk_len, gamma, permute),
    )
    return tr.outcome_alice, tr.outcome_bob, tr
