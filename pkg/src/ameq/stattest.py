"""One-pass statistical test that mirrors one checksum step.

The test holds the live block pairs as advice and reads the candidate
random string once, left to right, in the order the protocol consumes it:
for each pair, ``lambda`` consecutive ``n``-bit slices.  It accepts when at
least half of the unequal pairs get a differing checksum.  Synchronisation
is not simulated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bits import BitString


class SpaceExceeded(AssertionError):
    """The test's working state grew past its configured bound."""


class TapeReader:
    """Read-once, left-to-right view of a candidate string."""

    def __init__(self, bits):
        self._bits = bits.to_array() if isinstance(bits, BitString) else np.asarray(bits, dtype=np.uint8)
        self.cursor = 0

    def __len__(self) -> int:
        return self._bits.size

    def read(self, count: int) -> np.ndarray:
        start = self.cursor
        end = start + count
        if end > self._bits.size:
            raise ValueError(f"candidate too short: need {end} bits, have {self._bits.size}")
        out = self._bits[start:end]
        self.cursor = end
        if self.cursor < start:
            raise AssertionError("tape cursor moved backwards")
        return out


def space_bound(N: int) -> int:
    """``S = ceil(N / log2^2 N)`` bits."""
    L = math.log2(N)
    return math.ceil(N / (L * L))


@dataclass
class StatTestInstance:
    """Advice pairs, the step parameters, and the candidate randomness.

    ``X`` and ``Y`` are ``(pairs, n)`` 0/1 matrices.  ``N`` (original block
    count) sets the space parameter; ``state_bits`` overrides the working
    memory bound, which otherwise defaults to ``max(S, 8 * ceil(log2(len + 2)))``.
    """

    X: np.ndarray
    Y: np.ndarray
    step: int
    lam: int
    candidate: BitString | np.ndarray
    N: int
    state_bits: int | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.uint8)
        self.Y = np.asarray(self.Y, dtype=np.uint8)
        if self.X.shape != self.Y.shape or self.X.ndim != 2:
            raise ValueError("advice must be two matrices of equal shape")
        if self.lam < 1:
            raise ValueError("lambda must be at least 1")
        S = space_bound(self.N)
        if S < 63 and self.X.shape[0] > 1 << S:
            raise ValueError("advice longer than 2^S pairs")

    @property
    def bits_needed(self) -> int:
        return self.X.shape[0] * self.lam * self.X.shape[1]


@dataclass(frozen=True)
class StatTestResult:
    accepted: bool
    revealed: frozenset
    unequal: frozenset
    bits_read: int
    peak_state_bits: int


def stat_test(inst: StatTestInstance) -> StatTestResult:
    """Accept iff revealed unequal pairs are at least half of all unequal pairs."""
    pairs, n = inst.X.shape
    tape = TapeReader(inst.candidate)
    if len(tape) < inst.bits_needed:
        raise ValueError(f"candidate has {len(tape)} bits, test needs {inst.bits_needed}")
    bound = inst.state_bits
    if bound is None:
        bound = max(space_bound(inst.N), 8 * math.ceil(math.log2(len(tape) + 2)))

    unequal_count = revealed_count = 0
    revealed, unequal = [], []
    peak = 0
    for b in range(pairs):
        x, y = inst.X[b].astype(np.int64), inst.Y[b].astype(np.int64)
        differs = False
        for _ in range(inst.lam):
            r = tape.read(n)
            if (int(x @ r) ^ int(y @ r)) & 1:
                differs = True
        # working state: cursor, two counters, one flag
        state = (
            tape.cursor.bit_length()
            + unequal_count.bit_length()
            + revealed_count.bit_length()
            + 1
        )
        peak = max(peak, state)
        if peak > bound:
            raise SpaceExceeded(f"state {peak} bits exceeds bound {bound}")
        if not np.array_equal(x, y):
            unequal_count += 1
            unequal.append(b)
            if differs:
                revealed_count += 1
                revealed.append(b)
    accepted = 2 * revealed_count >= unequal_count
    return StatTestResult(accepted, frozenset(revealed), frozenset(unequal), tape.cursor, peak)
