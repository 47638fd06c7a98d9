"""Narrow-sense binary BCH codes with syndrome decoding.

Bit position ``p`` of a word is the coefficient of ``X^p``; the syndrome
component ``S_j`` is the word evaluated at ``alpha^j``.  Codes may be
shortened: a code of ``length < 2^m - 1`` treats the missing high positions
as zero, and the decoder rejects roots that land there.

Only the syndromes at cyclotomic coset leaders are independent (for a binary
word ``S_{2j} = S_j^2``), so the wire format carries one ``m``-bit element per
leader, in ascending leader order.
"""

from __future__ import annotations

import warnings
from functools import cached_property

import numpy as np

from .bits import BitString
from .gf2m import TABLE_MAX_M, GaloisField, clmul, get_field


class DecodeFailure(Exception):
    """Syndrome is not that of any pattern within the decoding radius."""


def cyclotomic_coset(j: int, n: int) -> list[int]:
    out, c = [], j % n
    while c not in out:
        out.append(c)
        c = (2 * c) % n
    return out


class BchCode:
    """Binary narrow-sense BCH code of designed capacity ``t``.

    Attributes
    ----------
    n : int
        Full codeword length ``2^m - 1``.
    length : int
        Shortened length actually used (``<= n``).
    k : int
        Dimension of the full-length code, ``n - deg(g)``.
    t_dec : int
        Decoding radius from the BCH bound on the consecutive root run
        (``>= t``; equal to ``t`` for most parameters).
    leaders : ndarray
        Coset leaders whose syndromes are transmitted.
    """

    def __init__(self, m: int, t: int, length: int | None = None, field: GaloisField | None = None):
        if not 2 <= m <= TABLE_MAX_M:
            raise ValueError(f"m must be in [2, {TABLE_MAX_M}]")
        if not 1 <= t < (1 << (m - 1)):
            raise ValueError(f"t must satisfy 1 <= t < 2^(m-1) = {1 << (m - 1)}, got {t}")
        self.field = field or get_field(m)
        self.m = m
        self.t = t
        self.n = (1 << m) - 1
        self.length = self.n if length is None else int(length)
        if not 1 <= self.length <= self.n:
            raise ValueError(f"length must be in [1, {self.n}]")

        leaders, sizes, roots = [], [], set()
        for j in range(1, 2 * t, 2):
            if j in roots:
                continue
            coset = cyclotomic_coset(j, self.n)
            leaders.append(min(coset))
            sizes.append(len(coset))
            roots.update(coset)
        order = np.argsort(leaders)
        self.leaders = np.array(leaders, dtype=np.int64)[order]
        self.coset_sizes = np.array(sizes, dtype=np.int64)[order]
        self.redundancy = int(self.coset_sizes.sum())
        self.k = self.n - self.redundancy
        if self.k <= 0:
            raise ValueError(f"degenerate code: k = {self.k} for m={m}, t={t}")
        self.d_min_bound = 2 * t + 1

        run = 0
        while run + 1 < self.n and (run + 1) in roots:
            run += 1
        self.t_dec = run // 2

        # S_j (j = 1..2*t_dec) as a power of a leader syndrome: S_j = S_l^(2^s).
        leader_pos = {int(l): i for i, l in enumerate(self.leaders)}
        src, power = [], []
        for j in range(1, 2 * self.t_dec + 1):
            c, s = j, 0
            while c not in leader_pos:
                # walk backwards through the coset: c = l * 2^s
                c = (c * ((self.n + 1) // 2)) % self.n
                s += 1
            src.append(leader_pos[c])
            power.append(pow(2, s, self.n))
        self._expand_src = np.array(src, dtype=np.int64)
        self._expand_pow = np.array(power, dtype=np.int64)

    def __repr__(self) -> str:
        short = "" if self.length == self.n else f", length={self.length}"
        return f"BchCode(m={self.m}, t={self.t}{short}: [{self.n}, {self.k}, >={self.d_min_bound}])"

    @property
    def syndrome_bits(self) -> int:
        """Wire size of the leader syndromes."""
        return self.m * len(self.leaders)

    # -- generator polynomial --------------------------------------------------

    def minimal_poly(self, j: int) -> int:
        """Minimal polynomial of alpha^j as a GF(2)[X] integer."""
        F = self.field
        coeffs = [1]  # ascending, elements of GF(2^m)
        for c in cyclotomic_coset(j, self.n):
            root = F.alpha_pow(c)
            nxt = [0] * (len(coeffs) + 1)
            for i, a in enumerate(coeffs):
                nxt[i + 1] ^= a
                nxt[i] ^= F.mul(a, root)
            coeffs = nxt
        if any(a > 1 for a in coeffs):
            raise AssertionError("minimal polynomial has non-binary coefficients")
        return sum(a << i for i, a in enumerate(coeffs))

    @cached_property
    def generator_poly(self) -> int:
        """lcm of the minimal polynomials of alpha, ..., alpha^(2t)."""
        g = 1
        for leader in self.leaders:
            g = clmul(g, self.minimal_poly(int(leader)))
        return g

    def encode(self, message: BitString) -> BitString:
        """Non-systematic encoding ``c(X) = m(X) g(X)`` at full length."""
        if len(message) != self.k:
            raise ValueError(f"message must have {self.k} bits")
        msg = int(str(message)[::-1], 2) if len(message) else 0
        c = clmul(msg, self.generator_poly)
        text = format(c, "b")[::-1].ljust(self.n, "0")
        return BitString.from_str(text)

    # -- syndromes ---------------------------------------------------------------

    def _check_len(self, nbits: int) -> None:
        if nbits != self.length:
            raise ValueError(f"word length {nbits} != code length {self.length}")

    def leader_syndromes(self, word: BitString) -> np.ndarray:
        """``S_l = word(alpha^l)`` for each coset leader ``l``."""
        self._check_len(len(word))
        if self.length >= 4096:
            return self._windowed_syndromes(word)
        pos = np.flatnonzero(word.to_array())
        return self.leader_syndromes_from_positions(pos)

    def leader_syndromes_from_positions(self, positions: np.ndarray) -> np.ndarray:
        pos = np.asarray(positions, dtype=np.int64)
        exp = self.field.exp
        out = np.zeros(len(self.leaders), dtype=np.int64)
        if pos.size == 0:
            return out
        for i, leader in enumerate(self.leaders):
            out[i] = np.bitwise_xor.reduce(exp[(pos * int(leader)) % self.n])
        return out

    def _windowed_syndromes(self, word: BitString) -> np.ndarray:
        F = self.field
        w = 16 if self.length >= (1 << 20) else 8
        data = word.packed
        if w == 16:
            if data.size % 2:
                data = np.append(data, np.uint8(0))
            vals = (data[0::2].astype(np.int64) << 8) | data[1::2]
        else:
            vals = data.astype(np.int64)
        nz = np.flatnonzero(vals)
        vals = vals[nz]
        base = nz * w  # first bit position of each window
        out = np.zeros(len(self.leaders), dtype=np.int64)
        if vals.size == 0:
            return out
        size = 1 << w
        for i, leader in enumerate(self.leaders):
            leader = int(leader)
            # table[v] = sum over set bits of v of alpha^(leader * r); bit (w-1-r) <-> r
            table = np.zeros(size, dtype=np.int64)
            for bit in range(w):
                r = w - 1 - bit
                table[1 << bit : 2 << bit] = table[: 1 << bit] ^ F.alpha_pow(leader * r)
            logs = F.log[table[vals]].astype(np.int64)
            keep = logs >= 0
            e = (logs[keep] + (base[keep] * leader) % self.n) % self.n
            out[i] = np.bitwise_xor.reduce(F.exp[e]) if e.size else 0
        return out

    @cached_property
    def parity_check_bits(self) -> np.ndarray:
        """``(length, syndrome_bits)`` 0/1 matrix: row p holds bits of alpha^(l p)."""
        pos = np.arange(self.length, dtype=np.int64)
        cols = []
        for leader in self.leaders:
            vals = self.field.exp[(pos * int(leader)) % self.n].astype(np.int64)
            shifts = np.arange(self.m - 1, -1, -1, dtype=np.int64)
            cols.append(((vals[:, None] >> shifts) & 1).astype(np.uint8))
        mat = np.concatenate(cols, axis=1)
        mat.flags.writeable = False
        return mat

    def syndrome_bits_batch(self, words: np.ndarray) -> np.ndarray:
        """Serialized leader syndromes for a ``(B, length)`` 0/1 matrix."""
        words = np.asarray(words, dtype=np.uint8)
        if words.ndim != 2:
            raise ValueError("expected a 2-D word matrix")
        self._check_len(words.shape[1])
        prod = words.astype(np.float32) @ self.parity_check_bits.astype(np.float32)
        return (prod.astype(np.int64) & 1).astype(np.uint8)

    def expand(self, leader_synd: np.ndarray) -> np.ndarray:
        """Full vector ``S_1 .. S_{2 t_dec}`` from the leader syndromes."""
        F = self.field
        base = np.asarray(leader_synd, dtype=np.int64)[self._expand_src]
        logs = F.log[base].astype(np.int64)
        out = F.exp[(logs * self._expand_pow) % self.n].astype(np.int64)
        return np.where(logs < 0, 0, out)

    def syndrome(self, word: BitString) -> np.ndarray:
        """``S_j = word(alpha^j)`` for ``j = 1 .. 2 t_dec``."""
        return self.expand(self.leader_syndromes(word))

    def pack_syndromes(self, leader_synd: np.ndarray) -> BitString:
        shifts = np.arange(self.m - 1, -1, -1, dtype=np.int64)
        vals = np.asarray(leader_synd, dtype=np.int64)
        return BitString.from_array(((vals[:, None] >> shifts) & 1).reshape(-1))

    def unpack_syndromes(self, bits: BitString) -> np.ndarray:
        if len(bits) != self.syndrome_bits:
            raise ValueError(f"expected {self.syndrome_bits} syndrome bits, got {len(bits)}")
        arr = bits.to_array().reshape(-1, self.m).astype(np.int64)
        weights = 1 << np.arange(self.m - 1, -1, -1, dtype=np.int64)
        return arr @ weights

    # -- decoding ------------------------------------------------------------------

    def error_locator(self, synd: np.ndarray) -> list[int]:
        """Berlekamp-Massey; ascending coefficients of Lambda(x)."""
        F = self.field
        S = [int(s) for s in synd]
        C, B = [1], [1]
        L, shift, b = 0, 1, 1
        for r in range(len(S)):
            d = S[r]
            for i in range(1, L + 1):
                if C[i] and S[r - i]:
                    d ^= F.mul(C[i], S[r - i])
            if d == 0:
                shift += 1
                continue
            coef = F.div(d, b)
            T = list(C)
            need = len(B) + shift
            if len(C) < need:
                C = C + [0] * (need - len(C))
            for i, bi in enumerate(B):
                if bi:
                    C[i + shift] ^= F.mul(coef, bi)
            if 2 * L <= r:
                L, B, b, shift = r + 1 - L, T, d, 1
            else:
                shift += 1
        C = C[: L + 1] + [0] * max(0, L + 1 - len(C))
        if any(C[L + 1 :]):
            raise DecodeFailure("locator exceeds its length")
        return C

    def _chien(self, locator: list[int]) -> np.ndarray:
        F = self.field
        pos = np.arange(self.length, dtype=np.int64)
        acc = np.zeros(self.length, dtype=np.int64)
        for i, c in enumerate(locator):
            if c:
                acc ^= F.exp[(int(F.log[c]) - i * pos) % self.n]
        return np.flatnonzero(acc == 0)

    def decode_positions(self, synd: np.ndarray) -> np.ndarray:
        """Positions of the unique error pattern of weight ``<= t_dec``.

        Raises
        ------
        DecodeFailure
            If no such pattern exists inside the (shortened) length.
        """
        synd = np.asarray(synd, dtype=np.int64)
        if synd.shape != (2 * self.t_dec,):
            raise ValueError(f"expected {2 * self.t_dec} syndrome components")
        if not synd.any():
            return np.zeros(0, dtype=np.int64)
        locator = self.error_locator(synd)
        deg = len(locator) - 1
        while deg > 0 and locator[deg] == 0:
            deg -= 1
        if deg == 0 or deg > self.t_dec:
            raise DecodeFailure(f"locator degree {deg} outside 1..{self.t_dec}")
        if deg == 1:
            # Lambda = 1 + c x, root alpha^-p with alpha^p = c
            p = int(self.field.log[locator[1]])
            roots = np.array([p], dtype=np.int64) if p < self.length else np.zeros(0, dtype=np.int64)
        else:
            roots = self._chien(locator[: deg + 1])
        if roots.size != deg:
            raise DecodeFailure(f"found {roots.size} roots for a degree-{deg} locator")
        check = self.expand(self.leader_syndromes_from_positions(roots))
        if not np.array_equal(check, synd):
            raise DecodeFailure("decoded pattern does not reproduce the syndrome")
        return roots

    def decode_syndrome(self, synd: np.ndarray) -> BitString:
        """Error pattern (as a word of ``length`` bits) for syndrome ``synd``."""
        bits = np.zeros(self.length, dtype=np.uint8)
        bits[self.decode_positions(synd)] = 1
        return BitString.from_array(bits)


def bch_new(m: int, t: int, length: int | None = None) -> BchCode:
    """Construct the narrow-sense code; ``m = 3`` is accepted with a warning."""
    if m == 3:
        warnings.warn("m = 3 is below the recommended range m > 3", stacklevel=2)
    return BchCode(m, t, length)


def syndrome(code: BchCode, word: BitString) -> np.ndarray:
    return code.syndrome(word)


def decode_syndrome(code: BchCode, synd: np.ndarray) -> BitString:
    return code.decode_syndrome(synd)
