"""Arithmetic in GF(2^m).

Elements are integers whose bit ``i`` is the coefficient of ``X^i``.  Fields
with ``m <= TABLE_MAX_M`` get log/antilog tables (built lazily, vectorised);
larger fields, used only by the PRG hash family, fall back to carry-less
multiplication on Python ints.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

TABLE_MAX_M = 24

# Primitive polynomials, one per degree, as integers including the X^m term.
PRIMITIVE_POLYS = {
    2: 0b111,
    3: 0b1011,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x89,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
    17: 0x20009,
    18: 0x40081,
    19: 0x80027,
    20: 0x100009,
    21: 0x200005,
    22: 0x400003,
    23: 0x800021,
    24: 0x1000087,
}


def clmul(a: int, b: int) -> int:
    """Carry-less product of two GF(2)[X] polynomials."""
    if a.bit_length() < b.bit_length():
        a, b = b, a
    out = 0
    while b:
        low = b & -b
        out ^= a << (low.bit_length() - 1)
        b ^= low
    return out


def poly_mod(a: int, f: int) -> int:
    df = f.bit_length() - 1
    while a.bit_length() - 1 >= df:
        a ^= f << (a.bit_length() - 1 - df)
    return a


def poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, poly_mod(a, b)
    return a


def is_irreducible(f: int) -> bool:
    """Ben-Or test for a GF(2)[X] polynomial of degree >= 1."""
    m = f.bit_length() - 1
    if m < 1:
        return False
    if m == 1:
        return True
    if not f & 1:
        return False
    x = 0b10
    power = x
    for _ in range(m // 2):
        power = poly_mod(clmul(power, power), f)
        if poly_gcd(f, power ^ x) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def field_poly(m: int) -> int:
    """Defining polynomial for GF(2^m).

    Primitive table entry when available, otherwise the first irreducible
    trinomial ``X^m + X^k + 1`` (smallest k), then pentanomial, in
    lexicographic order.
    """
    if m in PRIMITIVE_POLYS:
        return PRIMITIVE_POLYS[m]
    top = 1 << m
    for k in range(1, m):
        f = top | (1 << k) | 1
        if is_irreducible(f):
            return f
    for a in range(3, m):
        for b in range(2, a):
            for c in range(1, b):
                f = top | (1 << a) | (1 << b) | (1 << c) | 1
                if is_irreducible(f):
                    return f
    raise ValueError(f"no low-weight irreducible polynomial of degree {m}")


def _mul_const_array(x: np.ndarray, c: int, m: int, poly: int) -> np.ndarray:
    """Multiply every element of ``x`` by the constant ``c`` via byte tables."""
    out = np.zeros_like(x)
    for shift in range(0, m, 8):
        table = np.array(
            [poly_mod(clmul(v << shift, c), poly) for v in range(256)], dtype=x.dtype
        )
        out ^= table[(x >> shift) & 0xFF]
    return out


class GaloisField:
    """GF(2^m) defined by ``poly``; generator alpha = X."""

    def __init__(self, m: int, poly: int | None = None):
        if m < 1:
            raise ValueError("m must be positive")
        self.m = m
        self.poly = field_poly(m) if poly is None else poly
        if self.poly.bit_length() - 1 != m:
            raise ValueError(f"polynomial degree must be {m}")
        self.size = 1 << m
        self.order = self.size - 1
        self._exp = None
        self._log = None
        self._exp_list = None
        self._log_list = None

    def __repr__(self) -> str:
        return f"GaloisField(m={self.m}, poly={self.poly:#x})"

    # -- tables --------------------------------------------------------------

    @property
    def has_tables(self) -> bool:
        return self.m <= TABLE_MAX_M

    def _build_tables(self) -> None:
        if not self.has_tables:
            raise ValueError(f"tables unavailable for m={self.m} > {TABLE_MAX_M}")
        q = self.order
        exp = np.empty(2 * q + 1, dtype=np.int32)
        exp[0] = 1
        filled = 1
        while filled < q:
            step = min(filled, q - filled)
            # alpha^(filled + i) = alpha^i * alpha^filled
            exp[filled : filled + step] = _mul_const_array(
                exp[:step], self._alpha_pow_slow(filled), self.m, self.poly
            )
            filled += step
        log = np.full(self.size, -1, dtype=np.int32)
        log[exp[:q]] = np.arange(q, dtype=np.int32)
        if np.count_nonzero(log[1:] >= 0) != q:
            raise ValueError(f"{self.poly:#x} is not primitive: alpha has order < {q}")
        exp[q : 2 * q] = exp[:q]
        exp[2 * q] = 0  # sentinel for "zero element" lookups
        exp.flags.writeable = False
        log.flags.writeable = False
        self._exp, self._log = exp, log

    def _alpha_pow_slow(self, e: int) -> int:
        out, base = 1, 0b10
        while e:
            if e & 1:
                out = poly_mod(clmul(out, base), self.poly)
            base = poly_mod(clmul(base, base), self.poly)
            e >>= 1
        return out

    @property
    def exp(self) -> np.ndarray:
        """Antilog table of length ``2*order + 1``; last entry is 0."""
        if self._exp is None:
            self._build_tables()
        return self._exp

    @property
    def log(self) -> np.ndarray:
        """Log table; ``log[0] == -1``."""
        if self._log is None:
            self._build_tables()
        return self._log

    def _lists(self):
        if self._exp_list is None:
            self._exp_list = self.exp.tolist()
            self._log_list = self.log.tolist()
        return self._exp_list, self._log_list

    # -- scalar arithmetic ----------------------------------------------------

    def _check(self, a: int) -> None:
        if not 0 <= a < self.size:
            raise ValueError(f"{a} is not an element of GF(2^{self.m})")

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        self._check(a)
        self._check(b)
        if a == 0 or b == 0:
            return 0
        if self.m <= 16:
            exp, log = self._lists()
            return exp[log[a] + log[b]]
        if self.has_tables:
            return int(self.exp[self.log[a] + self.log[b]])
        return poly_mod(clmul(a, b), self.poly)

    def pow(self, a: int, e: int) -> int:
        self._check(a)
        if a == 0:
            return 1 if e == 0 else 0
        if self.has_tables:
            return int(self.exp[(int(self.log[a]) * e) % self.order])
        out, base = 1, a
        e %= self.order
        while e:
            if e & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            e >>= 1
        return out

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return self.pow(a, self.order - 1)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def alpha_pow(self, e: int) -> int:
        if self.has_tables:
            return int(self.exp[e % self.order])
        return self._alpha_pow_slow(e % self.order)

    # -- vectorised arithmetic (table fields only) -----------------------------

    def mul_array(self, a: np.ndarray, b) -> np.ndarray:
        """Elementwise product; ``b`` may be an array or a scalar."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        la = self.log[a].astype(np.int64)
        lb = self.log[b].astype(np.int64)
        out = self.exp[(la + lb) % self.order].astype(np.int64)
        return np.where((la < 0) | (lb < 0), 0, out)

    def pow_array(self, a: np.ndarray, e: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        la = self.log[a].astype(np.int64)
        out = self.exp[(la * e) % self.order].astype(np.int64)
        return np.where(la < 0, 0 if e else 1, out)

    def element_order(self, a: int) -> int:
        """Multiplicative order, by brute force (small fields only)."""
        if a == 0:
            raise ValueError("0 has no multiplicative order")
        x, k = a, 1
        while x != 1:
            x = self.mul(x, a)
            k += 1
        return k


@lru_cache(maxsize=None)
def get_field(m: int) -> GaloisField:
    """Shared field instance per degree."""
    return GaloisField(m)


def gf_mul(field: GaloisField, a: int, b: int) -> int:
    return field.mul(a, b)
