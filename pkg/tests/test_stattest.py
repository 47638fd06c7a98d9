import numpy as np
import pytest

from ameq.bits import BitString
from ameq.experiments import (
    ExperimentPlan,
    GapPoint,
    exact_accept_probability,
    prg_gap_experiment,
)
from ameq.prg import TrueRandomSource
from ameq.stattest import (
    SpaceExceeded,
    StatTestInstance,
    TapeReader,
    space_bound,
    stat_test,
)


def advice(pairs, unequal, n, rng):
    X = rng.integers(0, 2, size=(pairs, n), dtype=np.uint8)
    Y = X.copy()
    Y[:unequal, 0] ^= 1
    return X, Y


def test_all_equal_accepts(rng):
    X = rng.integers(0, 2, size=(10, 8), dtype=np.uint8)
    for _ in range(5):
        x = BitString.random(10 * 8 * 2, rng)
        res = stat_test(StatTestInstance(X, X.copy(), 1, 2, x, 1024))
        assert res.accepted and not res.unequal and not res.revealed


def test_zero_candidate_rejects(rng):
    X, Y = advice(10, 3, 8, rng)
    res = stat_test(StatTestInstance(X, Y, 1, 3, BitString.zeros(240), 1024))
    assert not res.accepted and res.unequal == frozenset({0, 1, 2})


def test_tie_accepts():
    X = np.zeros((2, 1), dtype=np.uint8)
    Y = np.ones((2, 1), dtype=np.uint8)
    res = stat_test(StatTestInstance(X, Y, 1, 1, BitString.from_str("10"), 1024))
    assert res.revealed == frozenset({0}) and res.accepted


def test_lambda4_accept_rate(rng):
    X, Y = advice(64, 64, 16, rng)
    need = 64 * 4 * 16
    trials = 10_000
    src = TrueRandomSource(2024)
    bits = src.bits(0, trials * need).reshape(trials, need)
    accepted = sum(stat_test(StatTestInstance(X, Y, 3, 4, bits[t], 1024)).accepted for t in range(trials))
    assert accepted / trials >= 0.99
    assert exact_accept_probability(64, 4) > 0.9999


def test_space_bound_and_footprint(rng):
    assert space_bound(1024) == 11
    assert space_bound(2**14) == 84
    X, Y = advice(64, 16, 16, rng)
    res = stat_test(StatTestInstance(X, Y, 1, 1, BitString.random(1024, rng), 1024))
    assert res.bits_read == 1024
    assert res.peak_state_bits <= max(space_bound(1024), 8 * 11)
    with pytest.raises(SpaceExceeded):
        stat_test(StatTestInstance(X, Y, 1, 1, BitString.random(1024, rng), 1024, state_bits=5))


def test_short_candidate_rejected(rng):
    X, Y = advice(4, 1, 8, rng)
    with pytest.raises(ValueError):
        stat_test(StatTestInstance(X, Y, 1, 1, BitString.zeros(31), 1024))


def test_tape_is_read_once_forward():
    tape = TapeReader(BitString.from_str("101100"))
    assert tape.read(2).tolist() == [1, 0]
    assert tape.read(3).tolist() == [1, 1, 0]
    assert tape.cursor == 5
    with pytest.raises(ValueError):
        tape.read(2)


def test_advice_length_bound():
    # N = 16: S = 1, so at most two pairs
    X = np.zeros((3, 2), dtype=np.uint8)
    with pytest.raises(ValueError):
        StatTestInstance(X, X, 1, 1, BitString.zeros(6), 16)


def test_gap_experiment_deterministic():
    plan = ExperimentPlan(trials=200, seed=3)
    a = prg_gap_experiment(plan, GapPoint())
    b = prg_gap_experiment(plan, GapPoint())
    assert a["decisions"] == b["decisions"]
    assert a["accept_true"] == b["accept_true"]


def test_gap_experiment_degenerate_generator_is_reported():
    plan = ExperimentPlan(trials=300, seed=4)
    row = prg_gap_experiment(plan, GapPoint(nisan_m=2))
    assert row["nisan_m"] == 2
    assert 0 <= row["accept_nisan"] <= 1
    assert row["ci_radius"] >= 0
