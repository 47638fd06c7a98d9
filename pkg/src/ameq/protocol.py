"""The staged checksum-and-synchronise protocol for N equality instances.

Stage 0: Alice sends a seed; both parties expand it into a shared stream.
Inputs are padded with ``N`` all-zero blocks on both sides.  Then for steps
``i = 1 .. ceil(log2 N)`` both parties compute ``lambda_i`` inner-product
checksums for every live block, reconcile the checksum strings (chunked
sync up to step ``ceil(log2 log2 N)``, one-shot syndrome sync afterwards)
assuming at most a ``2^-i`` fraction of the bits differ, and drop every block
whose checksums disagree.  Surviving original blocks are declared equal.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bits import BitString, BlockArray, row_parities
from .channel import Transcript, recv, run, send
from .prg import (
    DEFAULT_SEED_CONSTANT,
    NisanSeed,
    PrgStream,
    TrueRandomSource,
    NisanSource,
    nisan_params,
)
from .sync import (
    DEFAULT_CHUNK_LEN,
    DEFAULT_GAMMA,
    orlitsky_alice,
    orlitsky_bob,
    smith_alice,
    smith_bob,
)

OK = "ok"
SYNC_FAILURE = "sync_failure"


def _ceil_ratio(num: int, denom) -> int:
    if isinstance(denom, int):
        return -(-num // denom)
    return math.ceil(num / denom)


def step_count(N: int) -> int:
    return math.ceil(math.log2(N))


def crossover_step(N: int) -> int:
    """Last step of the chunked-sync stage, ``ceil(log2 log2 N)``."""
    return math.ceil(math.log2(math.log2(N)))


def lambda_schedule(i: int, N: int, stage: int) -> int:
    """Checksum bits per live block at step ``i``."""
    if not 1 <= i <= step_count(N):
        raise ValueError(f"step {i} outside 1..{step_count(N)}")
    # exact integer arithmetic when N is a power of two
    L = N.bit_length() - 1 if N & (N - 1) == 0 else math.log2(N)
    if stage == 1:
        return max(1, _ceil_ratio(1 << i, L))
    if stage == 2:
        return max(1, _ceil_ratio(1 << i, L * L))
    raise ValueError("stage must be 1 or 2")


def distance_promise(live: int, lam: int, i: int) -> int:
    """``ceil(2^-i * live * lambda)`` differing checksum bits."""
    return -(-(live * lam) // (1 << i))


@dataclass
class EqSumConfig:
    """Parameters of one run.

    ``prg`` is ``"nisan"`` (seeded generator, seed sent in stage 0) or
    ``"true"`` (shared uniform stream from ``shared_seed``, nothing sent).
    ``nisan_m`` overrides the generator block width (test hook).
    """

    n: int
    N: int
    prg: str = "nisan"
    seed_constant: int = DEFAULT_SEED_CONSTANT
    crossover: int | None = None
    chunk_len: int = DEFAULT_CHUNK_LEN
    gamma: float = DEFAULT_GAMMA
    permute: bool = True
    max_bits: int | None = None
    allow_large_n: bool = False
    nisan_m: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.N < 4:
            raise ValueError("N must be at least 4")
        if self.prg not in ("nisan", "true"):
            raise ValueError("prg must be 'nisan' or 'true'")
        if self.n >= self.N and not self.allow_large_n:
            warnings.warn(
                f"n={self.n} >= N={self.N}: outside the regime n < N", stacklevel=2
            )
        if self.crossover is None:
            self.crossover = crossover_step(self.N)

    @property
    def steps(self) -> int:
        return step_count(self.N)

    @property
    def budget(self) -> int:
        return self.max_bits if self.max_bits is not None else 64 * self.n * self.N

    @property
    def random_bits(self) -> int:
        """Pseudorandom bit budget ``R = n^2 N^2``."""
        return (self.n * self.N) ** 2

    def nisan_shape(self) -> tuple[int, int]:
        m, k = nisan_params(self.n, self.N, self.seed_constant)
        if self.nisan_m is not None:
            m = self.nisan_m
            k = 0
            while m << k < self.random_bits:
                k += 1
        return m, k

    def stage(self, i: int) -> int:
        return 1 if i <= self.crossover else 2

    def lam(self, i: int) -> int:
        return lambda_schedule(i, self.N, self.stage(i))


def pad_with_dummies(X: BlockArray, Y: BlockArray) -> tuple[BlockArray, BlockArray]:
    """Append ``N`` all-zero blocks to both arrays."""
    if X.bits.shape != Y.bits.shape:
        raise ValueError("block arrays differ in shape")
    zeros = np.zeros_like(X.bits)
    return BlockArray(np.vstack([X.bits, zeros])), BlockArray(np.vstack([Y.bits, zeros]))


def checksums(packed_blocks: np.ndarray, live: np.ndarray, lam: int, r_bits: np.ndarray, n: int) -> np.ndarray:
    """``(len(live), lam)`` inner products of live blocks with consecutive slices.

    Slice ``j`` of the ``b``-th live block (ascending index order) is bits
    ``(b*lam + j)*n .. (b*lam + j + 1)*n - 1`` of ``r_bits``.
    """
    r = np.packbits(r_bits.reshape(live.size, lam, n), axis=-1)
    return row_parities(r, packed_blocks[live][:, None, :])


def checksum_round(packed_blocks: np.ndarray, live: np.ndarray, lam: int, stream: PrgStream, n: int) -> np.ndarray:
    """Draw ``len(live) * lam * n`` stream bits and compute the checksums."""
    r_bits = stream.take_array(live.size * lam * n)
    return checksums(packed_blocks, live, lam, r_bits, n)


def eliminate(live: np.ndarray, own: np.ndarray, peer: np.ndarray) -> np.ndarray:
    """Live indices whose checksum rows agree."""
    keep = ~np.any(own != peer, axis=1)
    return live[keep]


@dataclass
class StepRecord:
    step: int
    stage: int
    lam: int
    live_before: int
    promise: int
    stream_offset: int
    eliminated: np.ndarray
    diff_bits: int


@dataclass
class PartyOutput:
    z: BitString | None
    status: str
    steps: list[StepRecord]
    live_history: list[np.ndarray]
    stream_used: int
    failed_step: int | None = None


def _party(role: str, blocks: BlockArray, cfg: EqSumConfig, stream_seed: int | None, rng: np.random.Generator | None):
    """Shared body of both parties; ``role`` selects the sync side."""
    N, n = cfg.N, cfg.n
    if cfg.prg == "nisan":
        m, k = cfg.nisan_shape()
        if role == "alice":
            seed_bits = BitString.random(m * (2 * k + 1), rng)
            yield send(seed_bits, "seed")
        else:
            seed_bits = yield recv()
        source = NisanSource(NisanSeed.from_bits(seed_bits, m, k))
    else:
        source = TrueRandomSource(stream_seed)
    stream = PrgStream(source, limit=cfg.random_bits)

    packed = blocks.packed
    live = np.arange(2 * N)
    steps: list[StepRecord] = []
    history = [live]
    for i in range(1, cfg.steps + 1):
        stage, lam = cfg.stage(i), cfg.lam(i)
        e = distance_promise(live.size, lam, i)
        offset = stream.cursor
        own = checksum_round(packed, live, lam, stream, n)
        own_bits = BitString.from_array(own.reshape(-1))
        tag = f"stage{stage}/step{i}"
        if stage == 1:
            sync = smith_alice if role == "alice" else smith_bob
            res = yield from sync(own_bits, e, stream, cfg.chunk_len, cfg.gamma, cfg.permute, tag)
        else:
            sync = orlitsky_alice if role == "alice" else orlitsky_bob
            res = yield from sync(own_bits, e, tag)
        if not res.ok:
            return PartyOutput(None, SYNC_FAILURE, steps, history, stream.cursor, i)
        peer = res.peer_string.to_array().reshape(live.size, lam)
        kept = eliminate(live, own, peer)
        steps.append(
            StepRecord(i, stage, lam, live.size, e, offset, np.setdiff1d(live, kept), int((own != peer).sum()))
        )
        live = kept
        history.append(live)
    z = np.zeros(N, dtype=np.uint8)
    z[live[live < N]] = 1
    return PartyOutput(BitString.from_array(z), OK, steps, history, stream.cursor)


def eqsum_alice(X: BlockArray, cfg: EqSumConfig, rng: np.random.Generator, stream_seed: int | None = None):
    return (yield from _party("alice", X, cfg, stream_seed, rng))


def eqsum_bob(Y: BlockArray, cfg: EqSumConfig, stream_seed: int | None = None):
    return (yield from _party("bob", Y, cfg, stream_seed, None))


@dataclass
class EqSumResult:
    z: BitString | None
    status: str
    transcript: Transcript
    alice: PartyOutput
    bob: PartyOutput
    truth: np.ndarray
    step_failures: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == OK

    @property
    def correct(self) -> bool:
        return self.ok and np.array_equal(self.z.to_array().astype(bool), self.truth)

    @property
    def wrong_bits(self) -> int:
        if not self.ok:
            return int(self.truth.size)
        return int(np.count_nonzero(self.z.to_array().astype(bool) != self.truth))

    @property
    def lockstep(self) -> bool:
        a, b = self.alice.live_history, self.bob.live_history
        return len(a) == len(b) and all(np.array_equal(x, y) for x, y in zip(a, b))

    @property
    def total_bits(self) -> int:
        return self.transcript.total_bits

    def summary(self) -> dict:
        return {
            "status": self.status,
            "z": str(self.z) if self.z is not None else None,
            "total_bits": self.total_bits,
            "costs": stage_cost_report(self.transcript),
            "step_failures": self.step_failures,
            "stream_bits_used": self.alice.stream_used,
        }


def _step_failures(truth_unequal: np.ndarray, steps: list[StepRecord]) -> list[int]:
    """Steps that revealed fewer than half of the still-hidden unequal pairs."""
    hidden = set(np.flatnonzero(truth_unequal).tolist())
    failed = []
    for rec in steps:
        if not hidden:
            break
        found = hidden.intersection(rec.eliminated.tolist())
        if 2 * len(found) < len(hidden):
            failed.append(rec.step)
        hidden -= found
    return failed


def run_eqsum(
    X: BlockArray,
    Y: BlockArray,
    cfg: EqSumConfig,
    seed: int = 0,
) -> EqSumResult:
    """Run the protocol on a fresh channel.

    ``seed`` drives Alice's private generator (the Nisan seed) or, in
    ``prg="true"`` mode, the shared stream.
    """
    if X.bits.shape != (cfg.N, cfg.n) or Y.bits.shape != (cfg.N, cfg.n):
        raise ValueError(f"inputs must be {cfg.N} blocks of {cfg.n} bits")
    Xp, Yp = pad_with_dummies(X, Y)
    rng = np.random.default_rng(seed)
    stream_seed = seed if cfg.prg == "true" else None
    tr = run(eqsum_alice(Xp, cfg, rng, stream_seed), eqsum_bob(Yp, cfg, stream_seed), cfg.budget)
    a, b = tr.outcome_alice, tr.outcome_bob
    truth = X.equal_mask(Y)
    status = OK if a.status == OK and b.status == OK else SYNC_FAILURE
    z = a.z if status == OK else None
    if status == OK and a.z != b.z:
        raise AssertionError("parties disagree on the answer")
    unequal = np.concatenate([~truth, np.zeros(cfg.N, dtype=bool)])
    return EqSumResult(z, status, tr, a, b, truth, _step_failures(unequal, a.steps))


def stage_cost_report(tr: Transcript) -> dict:
    """Bits per stage and per step from the message tags."""
    by_tag = tr.bits_by_tag()
    report = {"seed": by_tag.get("seed", 0), "stage1": 0, "stage2": 0, "steps": {}}
    for tag, bits in by_tag.items():
        if tag.startswith("stage"):
            stage, step = tag.split("/")
            report[stage] += bits
            report["steps"][int(step[4:])] = report["steps"].get(int(step[4:]), 0) + bits
    report["steps"] = dict(sorted(report["steps"].items()))
    report["total"] = report["seed"] + report["stage1"] + report["stage2"]
    return report
