"""Packed bit strings and block arrays.

Bit 0 is the leftmost bit of the textual form.  Storage is a numpy ``uint8``
array packed big-endian (``np.packbits`` order) with the unused tail bits of
the last byte kept at zero, so equality and hashing can work on bytes.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


def _tail_mask(length: int) -> int:
    rem = length % 8
    return 0xFF if rem == 0 else (0xFF << (8 - rem)) & 0xFF


class BitString:
    """Immutable sequence of ``len`` bits."""

    __slots__ = ("_data", "_len")

    def __init__(self, packed: np.ndarray, length: int):
        if length < 0:
            raise ValueError("length must be non-negative")
        nbytes = (length + 7) // 8
        data = np.asarray(packed, dtype=np.uint8)
        if data.ndim != 1 or data.size != nbytes:
            raise ValueError(f"expected {nbytes} packed bytes for {length} bits, got {data.size}")
        if data.flags.writeable or (nbytes and int(data[-1]) & ~_tail_mask(length) & 0xFF):
            data = data.copy()
            if nbytes:
                data[-1] &= _tail_mask(length)
            data.flags.writeable = False
        self._data = data
        self._len = length

    # -- constructors -----------------------------------------------------

    @classmethod
    def zeros(cls, length: int) -> "BitString":
        return cls(np.zeros((length + 7) // 8, dtype=np.uint8), length)

    @classmethod
    def ones(cls, length: int) -> "BitString":
        return cls.from_array(np.ones(length, dtype=np.uint8))

    @classmethod
    def from_array(cls, bits: np.ndarray) -> "BitString":
        """Build from an array of 0/1 values (any integer or bool dtype)."""
        arr = np.asarray(bits)
        if arr.ndim != 1:
            arr = arr.reshape(-1)
        return cls(np.packbits(arr.astype(bool)), arr.size)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitString":
        return cls.from_array(np.fromiter((int(b) & 1 for b in bits), dtype=np.uint8))

    @classmethod
    def from_str(cls, text: str) -> "BitString":
        if any(c not in "01" for c in text):
            raise ValueError(f"not a bit string: {text!r}")
        return cls.from_array(np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0"))

    @classmethod
    def from_int(cls, value: int, length: int) -> "BitString":
        """Big-endian: bit 0 is the most significant of ``length`` bits."""
        if value < 0 or value >> length:
            raise ValueError(f"{value} does not fit in {length} bits")
        nbytes = (length + 7) // 8
        pad = nbytes * 8 - length
        raw = (value << pad).to_bytes(nbytes, "big")
        return cls(np.frombuffer(raw, dtype=np.uint8), length)

    @classmethod
    def from_hex(cls, text: str) -> "BitString":
        """Parse the ``"len:hexdigits"`` encoding."""
        try:
            head, digits = text.strip().split(":", 1)
            length = int(head)
        except ValueError:
            raise ValueError(f"expected 'len:hex', got {text!r}") from None
        need = (length + 3) // 4
        if len(digits) != need:
            raise ValueError(f"{length} bits need {need} hex digits, got {len(digits)}")
        if len(digits) % 2:
            digits += "0"
        data = np.frombuffer(bytes.fromhex(digits), dtype=np.uint8)
        if data.size and int(data[-1]) & ~_tail_mask(length) & 0xFF:
            raise ValueError("nonzero padding bits in hex encoding")
        return cls(data[: (length + 7) // 8], length)

    @classmethod
    def random(cls, length: int, rng: np.random.Generator) -> "BitString":
        return cls(rng.integers(0, 256, size=(length + 7) // 8, dtype=np.uint8), length)

    @classmethod
    def concat(cls, parts: Sequence["BitString"]) -> "BitString":
        if not parts:
            return cls.zeros(0)
        if all(len(p) % 8 == 0 for p in parts[:-1]):
            return cls(np.concatenate([p._data for p in parts]), sum(len(p) for p in parts))
        return cls.from_array(np.concatenate([p.to_array() for p in parts]))

    # -- conversions ----------------------------------------------------------

    @property
    def packed(self) -> np.ndarray:
        """Read-only packed bytes (tail bits zero)."""
        return self._data

    def to_array(self) -> np.ndarray:
        return np.unpackbits(self._data, count=self._len)

    def to_int(self) -> int:
        pad = self._data.size * 8 - self._len
        return int.from_bytes(self._data.tobytes(), "big") >> pad

    def to_hex(self) -> str:
        return f"{self._len}:{self._data.tobytes().hex()[: (self._len + 3) // 4]}"

    def __str__(self) -> str:
        return (self.to_array() + ord("0")).astype(np.uint8).tobytes().decode("ascii")

    def __repr__(self) -> str:
        if self._len <= 64:
            return f"BitString('{self}')"
        return f"BitString.from_hex('{self.to_hex()[:40]}...')"

    # -- sequence protocol ---------------------------------------------------

    def __len__(self) -> int:
        return self._len

    def __getitem__(self, key):
        if isinstance(key, slice):
            start, stop, step = key.indices(self._len)
            if step == 1 and start % 8 == 0:
                stop = max(stop, start)
                length = stop - start
                return BitString(self._data[start // 8 : start // 8 + (length + 7) // 8], length)
            return BitString.from_array(self.to_array()[key])
        i = int(key)
        if i < 0:
            i += self._len
        if not 0 <= i < self._len:
            raise IndexError(f"bit index {key} out of range for length {self._len}")
        return int(self._data[i >> 3] >> (7 - (i & 7))) & 1

    def __iter__(self):
        return iter(self.to_array().tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return self._len == other._len and bool(np.array_equal(self._data, other._data))

    def __hash__(self) -> int:
        return hash((self._len, self._data.tobytes()))

    def _check_len(self, other: "BitString") -> None:
        if self._len != len(other):
            raise ValueError(f"length mismatch: {self._len} != {len(other)}")

    def __xor__(self, other: "BitString") -> "BitString":
        self._check_len(other)
        return BitString(np.bitwise_xor(self._data, other._data), self._len)

    def __and__(self, other: "BitString") -> "BitString":
        self._check_len(other)
        return BitString(np.bitwise_and(self._data, other._data), self._len)

    def __invert__(self) -> "BitString":
        # __init__ clears the padding bits again
        return BitString(np.bitwise_not(self._data), self._len)

    def __add__(self, other: "BitString") -> "BitString":
        return BitString.concat([self, other])

    def weight(self) -> int:
        """Number of one bits."""
        return int(np.bitwise_count(self._data).sum())

    def any(self) -> bool:
        return bool(self._data.any())


def inner_product_mod2(x: BitString, r: BitString) -> int:
    """<x, r> over GF(2)."""
    return (x & r).weight() & 1


def hamming_distance(a: BitString, b: BitString) -> int:
    return (a ^ b).weight()


def xor(a: BitString, b: BitString) -> BitString:
    return a ^ b


def pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack each row of a 2-D 0/1 array into big-endian bytes."""
    return np.packbits(bits.astype(bool), axis=-1)


def row_parities(rows: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Parity of ``rows[..., :] & vec`` over the last axis of packed bytes."""
    return (np.bitwise_count(np.bitwise_and(rows, vec)).sum(axis=-1) & 1).astype(np.uint8)


class BlockArray:
    """``N`` blocks of ``n`` bits plus a live mask.

    Block contents are stored unpacked as an ``(N, n)`` read-only uint8
    matrix. ``live_mask`` is the only mutable part.
    """

    def __init__(self, bits: np.ndarray, live_mask: np.ndarray | None = None):
        mat = np.array(bits, dtype=np.uint8)
        if mat.ndim != 2 or mat.shape[1] < 1:
            raise ValueError("blocks must form an (N, n) matrix with n >= 1")
        if mat.size and mat.max(initial=0) > 1:
            raise ValueError("block matrix must hold 0/1 values")
        mat.flags.writeable = False
        self.bits = mat
        if live_mask is None:
            live_mask = np.ones(mat.shape[0], dtype=bool)
        live_mask = np.array(live_mask, dtype=bool)
        if live_mask.shape != (mat.shape[0],):
            raise ValueError("live_mask length must equal block count")
        self.live_mask = live_mask
        self._packed = None

    @classmethod
    def from_bitstrings(cls, blocks: Sequence[BitString]) -> "BlockArray":
        if not blocks:
            raise ValueError("need at least one block")
        n = len(blocks[0])
        if any(len(b) != n for b in blocks):
            raise ValueError("all blocks must have the same length")
        return cls(np.stack([b.to_array() for b in blocks]))

    @classmethod
    def from_hex_list(cls, items: Sequence[str]) -> "BlockArray":
        return cls.from_bitstrings([BitString.from_hex(s) for s in items])

    @classmethod
    def random(cls, count: int, n: int, rng: np.random.Generator) -> "BlockArray":
        return cls(rng.integers(0, 2, size=(count, n), dtype=np.uint8))

    @property
    def block_count(self) -> int:
        return self.bits.shape[0]

    @property
    def block_len(self) -> int:
        return self.bits.shape[1]

    def __len__(self) -> int:
        return self.block_count

    def block(self, i: int) -> BitString:
        return BitString.from_array(self.bits[i])

    def __getitem__(self, i: int) -> BitString:
        return self.block(i)

    def __iter__(self):
        return (self.block(i) for i in range(self.block_count))

    def to_hex_list(self) -> list[str]:
        return [b.to_hex() for b in self]

    @property
    def packed(self) -> np.ndarray:
        """Rows packed to bytes, cached."""
        if self._packed is None:
            self._packed = pack_rows(self.bits)
            self._packed.flags.writeable = False
        return self._packed

    def live_indices(self) -> np.ndarray:
        return np.flatnonzero(self.live_mask)

    def equal_mask(self, other: "BlockArray") -> np.ndarray:
        """Per-block equality against another array of the same shape."""
        if self.bits.shape != other.bits.shape:
            raise ValueError("block arrays differ in shape")
        return ~np.any(self.bits != other.bits, axis=1)

    def copy(self) -> "BlockArray":
        return BlockArray(self.bits, self.live_mask.copy())
