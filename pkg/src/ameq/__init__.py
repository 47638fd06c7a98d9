"""Simulator for the amortised direct sum of equality predicates.

Bit strings, GF(2^m)/BCH codes, a Nisan generator, a bit-counting two-party
channel, syndrome-based string synchronisation, classic equality baselines,
the staged O(N) protocol, and the Monte-Carlo harness around them.
"""

from .bch import BchCode, DecodeFailure, bch_new, decode_syndrome, syndrome
from .bits import BitString, BlockArray, hamming_distance, inner_product_mod2, xor
from .channel import BudgetExceeded, Deadlock, Transcript, recv, run, send
from .gf2m import GaloisField, gf_mul
from .prg import HashFunction, NisanSeed, PrgStream, StreamExhausted, nisan_expand, seed_length_for, stream_take
from .protocol import (
    EqSumConfig,
    checksum_round,
    eliminate,
    lambda_schedule,
    pad_with_dummies,
    run_eqsum,
    stage_cost_report,
)
from .stattest import StatTestInstance, stat_test
from .sync import SyncResult, orlitsky_sync, smith_sync

__version__ = "0.1.0"

__all__ = [
    "BchCode", "DecodeFailure", "bch_new", "decode_syndrome", "syndrome",
    "BitString", "BlockArray", "hamming_distance", "inner_product_mod2", "xor",
    "BudgetExceeded", "Deadlock", "Transcript", "recv", "run", "send",
    "GaloisField", "gf_mul",
    "HashFunction", "NisanSeed", "PrgStream", "StreamExhausted", "nisan_expand",
    "seed_length_for", "stream_take",
    "EqSumConfig", "checksum_round", "eliminate", "lambda_schedule", "pad_with_dummies",
    "run_eqsum", "stage_cost_report",
    "StatTestInstance", "stat_test",
    "SyncResult", "orlitsky_sync", "smith_sync",
]
