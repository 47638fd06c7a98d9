"""Monte-Carlo harness: cost curves, error tables, PRG gap, sanity suites.

Every experiment is a deterministic function of its plan's seed.  Results
are lists of flat dicts so they can be written straight to CSV.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import binomtest, norm

from .baselines import naive_direct_sum, naive_public_cost
from .bits import BitString, BlockArray, row_parities
from .prg import NisanSeed, TrueRandomSource, nisan_params
from .protocol import EqSumConfig, run_eqsum
from .stattest import StatTestInstance, stat_test

DEFAULT_BASELINE_EPS = 1e-6


@dataclass
class ExperimentPlan:
    grid: Sequence[tuple[int, int]] = ((16, 1024),)
    trials: int = 20
    prg_modes: Sequence[str] = ("nisan",)
    unequal_fracs: Sequence[float] = (0.25,)
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


def planted_instance(n: int, N: int, frac: float, rng: np.random.Generator) -> tuple[BlockArray, BlockArray]:
    """Random ``X``; ``Y`` equals ``X`` except on ``round(frac N)`` random blocks."""
    X = rng.integers(0, 2, size=(N, n), dtype=np.uint8)
    Y = X.copy()
    bad = rng.choice(N, size=int(round(frac * N)), replace=False)
    for b in bad:
        flip = np.zeros(n, dtype=np.uint8)
        while not flip.any():
            flip = rng.integers(0, 2, size=n, dtype=np.uint8)
        Y[b] ^= flip
    return BlockArray(X), BlockArray(Y)


def wilson(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    ci = binomtest(successes, trials).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


def write_csv(rows: list[dict], path: str) -> None:
    if not rows:
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)


def _seeds(base: int, *keys: int) -> int:
    return int(np.random.SeedSequence([base, *keys]).generate_state(1)[0])


# -- cost ---------------------------------------------------------------------------------


BENCH_COLUMNS = [
    "n", "N", "trials", "prg", "mean_bits", "bits_per_N", "seed_bits", "stage1_bits",
    "stage2_bits", "failures", "naive_public_bits_per_N", "naive_public_measured_per_N",
    "baseline_eps",
]


def bench_linear_cost(
    plan: ExperimentPlan,
    baseline_eps: float = DEFAULT_BASELINE_EPS,
    measure_baseline: bool = True,
) -> list[dict]:
    """Mean cost of the main protocol per grid point, next to the blockwise baseline."""
    rows = []
    frac = plan.unequal_fracs[0]
    for prg in plan.prg_modes:
        for n, N in plan.grid:
            totals, seeds, s1, s2, fails = [], [], [], [], 0
            for trial in range(plan.trials):
                rng = np.random.default_rng(_seeds(plan.seed, n, N, trial))
                X, Y = planted_instance(n, N, frac, rng)
                cfg = EqSumConfig(n, N, prg=prg, allow_large_n=True)
                res = run_eqsum(X, Y, cfg, seed=_seeds(plan.seed, n, N, trial, 1))
                rep = res.summary()["costs"]
                totals.append(res.total_bits)
                seeds.append(rep["seed"])
                s1.append(rep["stage1"])
                s2.append(rep["stage2"])
                fails += not res.correct
            measured = float("nan")
            if measure_baseline:
                rng = np.random.default_rng(_seeds(plan.seed, n, N, 99))
                X, Y = planted_instance(n, N, frac, rng)
                _, tr = naive_direct_sum("public", X, Y, baseline_eps, seed=plan.seed)
                measured = tr.total_bits / N
            rows.append({
                "n": n,
                "N": N,
                "trials": plan.trials,
                "prg": prg,
                "mean_bits": float(np.mean(totals)),
                "bits_per_N": float(np.mean(totals)) / N,
                "seed_bits": float(np.mean(seeds)),
                "stage1_bits": float(np.mean(s1)),
                "stage2_bits": float(np.mean(s2)),
                "failures": fails,
                "naive_public_bits_per_N": naive_public_cost(N, baseline_eps) / N,
                "naive_public_measured_per_N": measured,
                "baseline_eps": baseline_eps,
            })
    return rows


# -- error rates ----------------------------------------------------------------------------


ERROR_COLUMNS = [
    "n", "N", "prg", "unequal_frac", "trials", "failures", "failure_rate", "ci_low",
    "ci_high", "sync_aborts", "wrong_output_runs", "wrong_bits", "runs_with_step_failure",
    "step_failure_fraction", "lockstep_violations",
]


def error_rate_experiment(plan: ExperimentPlan) -> list[dict]:
    """Per-point failure rate (any wrong bit or abort) with Wilson intervals."""
    rows = []
    for prg in plan.prg_modes:
        for frac in plan.unequal_fracs:
            for n, N in plan.grid:
                fails = aborts = wrong_runs = wrong_bits = step_runs = lock = 0
                steps_total = steps_failed = 0
                for trial in range(plan.trials):
                    rng = np.random.default_rng(_seeds(plan.seed, n, N, trial, int(frac * 1e6)))
                    X, Y = planted_instance(n, N, frac, rng)
                    cfg = EqSumConfig(n, N, prg=prg, allow_large_n=True)
                    res = run_eqsum(X, Y, cfg, seed=_seeds(plan.seed, n, N, trial, 2))
                    fails += not res.correct
                    aborts += not res.ok
                    if res.ok and not res.correct:
                        wrong_runs += 1
                    wrong_bits += res.wrong_bits if res.ok else 0
                    step_runs += bool(res.step_failures)
                    steps_total += len(res.alice.steps)
                    steps_failed += len(res.step_failures)
                    lock += not res.lockstep
                lo, hi = wilson(fails, plan.trials)
                rows.append({
                    "n": n,
                    "N": N,
                    "prg": prg,
                    "unequal_frac": frac,
                    "trials": plan.trials,
                    "failures": fails,
                    "failure_rate": fails / plan.trials,
                    "ci_low": lo,
                    "ci_high": hi,
                    "sync_aborts": aborts,
                    "wrong_output_runs": wrong_runs,
                    "wrong_bits": wrong_bits,
                    "runs_with_step_failure": step_runs,
                    "step_failure_fraction": steps_failed / max(steps_total, 1),
                    "lockstep_violations": lock,
                })
    return rows


# -- PRG gap ----------------------------------------------------------------------------------


@dataclass
class GapPoint:
    """Operating point of the PRG-gap experiment."""

    n: int = 16
    N: int = 1024
    step: int = 1
    lam: int = 1
    pairs: int = 64
    unequal: int = 16
    nisan_m: int | None = None


def _advice(point: GapPoint, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    X = rng.integers(0, 2, size=(point.pairs, point.n), dtype=np.uint8)
    Y = X.copy()
    for b in rng.choice(point.pairs, size=point.unequal, replace=False):
        flip = np.zeros(point.n, dtype=np.uint8)
        while not flip.any():
            flip = rng.integers(0, 2, size=point.n, dtype=np.uint8)
        Y[b] ^= flip
    return X, Y


def _nisan_shape(point: GapPoint) -> tuple[int, int]:
    m, k = nisan_params(point.n, point.N)
    if point.nisan_m is not None:
        m = point.nisan_m
        R = (point.n * point.N) ** 2
        k = 0
        while m << k < R:
            k += 1
    return m, k


def candidate_bits(mode: str, point: GapPoint, trial_seed: int, count: int) -> np.ndarray:
    """First ``count`` bits of a fresh stream in the given mode."""
    if mode == "nisan":
        m, k = _nisan_shape(point)
        seed = NisanSeed.random(m, k, np.random.default_rng(trial_seed))
        return seed.bits(0, count)
    if mode == "true":
        return TrueRandomSource(trial_seed).bits(0, count)
    raise ValueError(f"unknown mode {mode!r}")


def prg_gap_experiment(plan: ExperimentPlan, point: GapPoint | None = None) -> dict:
    """Acceptance rate of the statistical test under both stream modes."""
    if point is None:
        point = GapPoint(*plan.grid[0]) if plan.grid else GapPoint()
    rng = np.random.default_rng(_seeds(plan.seed, 7))
    X, Y = _advice(point, rng)
    need = point.pairs * point.lam * point.n
    accepts, decisions = {}, {}
    for mode in ("nisan", "true"):
        acc = []
        for trial in range(plan.trials):
            bits = candidate_bits(mode, point, _seeds(plan.seed, 11, trial, mode == "nisan"), need)
            inst = StatTestInstance(X, Y, point.step, point.lam, bits, point.N)
            acc.append(stat_test(inst).accepted)
        decisions[mode] = acc
        accepts[mode] = int(sum(acc))
    T = plan.trials
    p1, p2 = accepts["nisan"] / T, accepts["true"] / T
    radius = norm.ppf(0.975) * math.sqrt(p1 * (1 - p1) / T + p2 * (1 - p2) / T)
    gap = p1 - p2
    return {
        "n": point.n,
        "N": point.N,
        "step": point.step,
        "lam": point.lam,
        "pairs": point.pairs,
        "unequal": point.unequal,
        "nisan_m": _nisan_shape(point)[0],
        "trials": T,
        "accept_nisan": p1,
        "accept_true": p2,
        "gap": gap,
        "ci_radius": radius,
        "ci_contains_zero": abs(gap) <= radius,
        "decisions": decisions,
    }


def exact_accept_probability(unequal: int, lam: int) -> float:
    """P[revealed >= unequal / 2] when each pair is revealed w.p. 1 - 2^-lam."""
    from scipy.stats import binom

    q = 1 - 2.0 ** (-lam)
    need = math.ceil(unequal / 2)
    return float(binom.sf(need - 1, unequal, q))


# -- inner products ------------------------------------------------------------------------


def inner_product_trials(x: BitString, y: BitString, l: int, trials: int, seed: int, batch: int = 1 << 16) -> int:
    """How many of ``trials`` independent ``l``-fold tests find all products equal."""
    n = len(x)
    source = TrueRandomSource(seed)
    px, py = x.packed, y.packed
    agree = 0
    pos = 0
    for start in range(0, trials, batch):
        count = min(batch, trials - start)
        r = source.bits(pos, count * l * n).reshape(count, l, n)
        pos += count * l * n
        rp = np.packbits(r, axis=-1)
        same = row_parities(rp, px) == row_parities(rp, py)
        agree += int(np.count_nonzero(same.all(axis=1)))
    return agree


# -- sync suites ------------------------------------------------------------------------------


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def random_pair(n: int, e: int, rng: np.random.Generator, burst: bool = False) -> tuple[BitString, BitString]:
    A = rng.integers(0, 2, size=n, dtype=np.uint8)
    d = np.zeros(n, dtype=np.uint8)
    if burst:
        start = int(rng.integers(0, n - e + 1))
        d[start : start + e] = 1
    else:
        d[rng.choice(n, size=e, replace=False)] = 1
    return BitString.from_array(A), BitString.from_array(A ^ d)


def smith_trials(n: int, p: float, trials: int, seed: int, permute: bool = True, burst: bool = False) -> dict:
    from .sync import smith_sync

    e = int(round(p * n))
    ok = cost = 0
    for trial in range(trials):
        rng = np.random.default_rng(_seeds(seed, n, trial, burst))
        A, B = random_pair(n, e, rng, burst)
        ra, rb, tr = smith_sync(A, B, e, seed=_seeds(seed, trial, 5), permute=permute)
        ok += ra.ok and rb.ok and ra.peer_string == B and rb.peer_string == A
        cost += tr.total_bits
    mean_cost = cost / trials
    return {
        "n": n,
        "p": p,
        "e": e,
        "permute": permute,
        "burst": burst,
        "trials": trials,
        "successes": ok,
        "success_rate": ok / trials,
        "mean_bits": mean_cost,
        "ratio_to_nH": mean_cost / (n * binary_entropy(p)) if 0 < p < 1 else float("nan"),
    }


def orlitsky_trials(m: int, trials: int, seed: int, t: int = 8) -> dict:
    """Random flips within capacity on strings of ``2^m - 1`` bits."""
    from .sync import chunk_layout, orlitsky_sync

    n = (1 << m) - 1
    ok = over = 0
    worst = 0
    for trial in range(trials):
        rng = np.random.default_rng(_seeds(seed, m, trial))
        e = int(rng.integers(0, t + 1))
        A, B = random_pair(n, e, rng)
        ra, rb, tr = orlitsky_sync(A, B, t)
        ok += ra.ok and rb.ok and ra.peer_string == B and rb.peer_string == A
        bound = 2 * m * t + 2 * math.ceil(math.log2(n + 1)) + 2
        over += tr.total_bits > bound
        worst = max(worst, tr.total_bits)
    code = chunk_layout(n, t).code
    return {
        "n": n,
        "t": t,
        "trials": trials,
        "successes": ok,
        "success_rate": ok / trials,
        "bound_violations": over,
        "max_bits": worst,
        "syndrome_bits": code.syndrome_bits if code else n,
    }


def bch_exhaustive(ms: Iterable[int] = (4, 5), ts: Iterable[int] = (1, 2, 3)) -> list[dict]:
    from itertools import combinations

    from .bch import bch_new

    rows = []
    for m in ms:
        for t in ts:
            code = bch_new(m, t)
            ok = total = 0
            for w in range(t + 1):
                for pos in combinations(range(code.n), w):
                    positions = np.array(pos, dtype=np.int64)
                    synd = code.expand(code.leader_syndromes_from_positions(positions))
                    got = code.decode_positions(synd)
                    ok += np.array_equal(np.sort(got), positions)
                    total += 1
            rows.append({
                "m": m, "t": t, "n": code.n, "k": code.k, "patterns": total, "recovered": ok,
                "redundancy": code.n - code.k, "mt": m * t, "bound_holds": code.n - code.k <= m * t,
            })
    return rows
