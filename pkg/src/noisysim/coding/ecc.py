"""Error-correcting code: binary expansion of a shortened Reed-Solomon code.

Symbols live in GF(2^m) (m = 8 unless the block needs more than 255
symbols).  The code is systematic: the message bits come first, followed by
the parity symbols.  Its rate is at most 1/5 and the block length is chosen
so that any corruption touching at most ``t = (N - K) // 2`` symbols is
corrected.  In particular every contiguous burst of up to a third of the
codeword bits is corrected.

Bit-level guarantee versus bit flips scattered over many symbols: a binary
code cannot uniquely decode arbitrary flips of a third of its bits unless
it has at most a handful of codewords (Plotkin bound), so scattered flips
hitting more than ``t`` symbols are *not* guaranteed to decode.  Such words
decode to failure (or, rarely, to a wrong codeword); the AMD layer above
catches the latter.

Encoding is GF(2)-linear and the decoder's correction depends only on the
syndrome, i.e. only on the error pattern.  Encoding and the error-free path
of decoding are matrix products over GF(2).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import DecodeError, EncodingError
from .gf import GF2m

SYMBOL_BITS = 8
RATE_DENOMINATOR = 5
# Bound on |ecc_encode(m)| / |m| for |m| >= 16 (checked by the test-suite).
C_E = 7
C_1 = 12 * C_E + 76
C_2 = 32 * C_E + 115


@dataclass(frozen=True)
class Layout:
    msg_bits: int
    m: int          # symbol size in bits
    k: int          # message symbols
    n: int          # block length in symbols
    pad: int        # leading zero bits of the first message symbol, not sent

    @property
    def nsym(self) -> int:
        return self.n - self.k

    @property
    def t(self) -> int:
        return self.nsym // 2

    @property
    def code_bits(self) -> int:
        return self.n * self.m - self.pad


def _burst_symbols(burst_bits: int, m: int) -> int:
    if burst_bits <= 0:
        return 0
    return -(-(burst_bits - 1) // m) + 1


@lru_cache(maxsize=None)
def layout(msg_bits: int) -> Layout:
    if msg_bits < 1:
        raise EncodingError("cannot encode an empty message")
    for m in range(SYMBOL_BITS, 17):
        k = -(-msg_bits // m)
        pad = k * m - msg_bits
        n = RATE_DENOMINATOR * k
        while n <= (1 << m) - 1:
            lay = Layout(msg_bits, m, k, n, pad)
            if lay.t >= _burst_symbols(lay.code_bits // 3, m):
                return lay
            n += 1
    raise EncodingError(f"message of {msg_bits} bits is too long for the code")


def encoded_length(msg_bits: int) -> int:
    return layout(msg_bits).code_bits


class ReedSolomon:
    """One fixed (message length -> codeword length) instance."""

    def __init__(self, msg_bits: int):
        lay = layout(msg_bits)
        self.layout = lay
        self.F = GF2m(lay.m, primitive=True) if lay.m > 8 else _gf8()
        F = self.F
        g = [1]
        for i in range(1, lay.nsym + 1):
            # g(x) *= (x - alpha^i), coefficients highest degree first
            root = F.alpha_pow(i)
            nxt = g + [0]
            for j in range(len(g)):
                nxt[j + 1] ^= F.mul(g[j], root)
            g = nxt
        self.gen = g
        self._G = self._binary_generator()
        self._H = self._binary_syndrome()

    # symbol level ---------------------------------------------------------
    def _parity(self, msg_syms: list[int]) -> list[int]:
        F, g, nsym = self.F, self.gen, self.layout.nsym
        rem = list(msg_syms) + [0] * nsym
        for i in range(len(msg_syms)):
            coef = rem[i]
            if coef:
                for j in range(1, len(g)):
                    rem[i + j] ^= F.mul(g[j], coef)
        return rem[len(msg_syms):]

    def _to_symbols(self, bits_arr: np.ndarray, count: int, lead_pad: int) -> list[int]:
        m = self.layout.m
        full = np.concatenate([np.zeros(lead_pad, dtype=np.uint8), bits_arr])
        weights = 1 << np.arange(m - 1, -1, -1)
        return [int(v) for v in full.reshape(count, m) @ weights]

    def _from_symbols(self, syms: list[int]) -> np.ndarray:
        m = self.layout.m
        arr = np.array(syms, dtype=np.int64)[:, None] >> np.arange(m - 1, -1, -1)
        return (arr & 1).astype(np.uint8).ravel()

    def _encode_slow(self, msg: np.ndarray) -> np.ndarray:
        lay = self.layout
        syms = self._to_symbols(msg, lay.k, lay.pad)
        parity = self._parity(syms)
        return np.concatenate([msg, self._from_symbols(parity)])

    def _binary_generator(self) -> np.ndarray:
        lay = self.layout
        rows = np.zeros((lay.msg_bits, lay.code_bits), dtype=np.float32)
        for i in range(lay.msg_bits):
            e = np.zeros(lay.msg_bits, dtype=np.uint8)
            e[i] = 1
            rows[i] = self._encode_slow(e)
        return rows

    def _binary_syndrome(self) -> np.ndarray:
        """code_bits x (nsym*m) matrix mapping received bits to syndromes."""
        lay, F = self.layout, self.F
        m = lay.m
        H = np.zeros((lay.code_bits, lay.nsym * m), dtype=np.float32)
        shift = np.arange(m - 1, -1, -1)
        for pos in range(lay.code_bits):
            full_pos = pos + lay.pad
            sym, bit = divmod(full_pos, m)
            value = 1 << (m - 1 - bit)
            degree = lay.n - 1 - sym
            contrib = [F.mul(value, F.alpha_pow(j * degree)) for j in range(1, lay.nsym + 1)]
            H[pos] = ((np.array(contrib, dtype=np.int64)[:, None] >> shift) & 1).ravel()
        return H

    # public ---------------------------------------------------------------
    def encode(self, msg: np.ndarray) -> np.ndarray:
        if len(msg) != self.layout.msg_bits:
            raise EncodingError("message length does not match this code")
        prod = msg.astype(np.float32) @ self._G
        return (prod.astype(np.int64) & 1).astype(np.uint8)

    def syndrome_bits(self, code: np.ndarray) -> np.ndarray:
        prod = code.astype(np.float32) @ self._H
        return (prod.astype(np.int64) & 1).astype(np.uint8)

    def decode(self, code: np.ndarray) -> np.ndarray:
        lay = self.layout
        if len(code) != lay.code_bits:
            raise DecodeError(f"expected {lay.code_bits} bits, got {len(code)}")
        if not self.syndrome_bits(code).any():
            return code[:lay.msg_bits].copy()
        syms = self._to_symbols(code, lay.n, lay.pad)
        fixed = self._correct(syms)
        out = self._from_symbols(fixed)
        if out[:lay.pad].any():
            raise DecodeError("correction touched the shortened positions")
        return out[lay.pad:lay.pad + lay.msg_bits]

    def _correct(self, syms: list[int]) -> list[int]:
        F, lay = self.F, self.layout
        n, nsym = lay.n, lay.nsym

        def poly_eval(p_high_first: list[int], x: int) -> int:
            acc = 0
            for c in p_high_first:
                acc = F.mul(acc, x) ^ c
            return acc

        S = [poly_eval(syms, F.alpha_pow(j)) for j in range(1, nsym + 1)]
        # Berlekamp-Massey, polynomials lowest degree first
        C, B = [1], [1]
        L, shift, b = 0, 1, 1
        for i in range(nsym):
            d = S[i]
            for j in range(1, L + 1):
                if j < len(C):
                    d ^= F.mul(C[j], S[i - j])
            if d == 0:
                shift += 1
                continue
            coef = F.mul(d, F.inv(b))
            T = list(C)
            need = len(B) + shift
            if len(C) < need:
                C = C + [0] * (need - len(C))
            for j, bj in enumerate(B):
                C[j + shift] ^= F.mul(coef, bj)
            if 2 * L <= i:
                L, B, b, shift = i + 1 - L, T, d, 1
            else:
                shift += 1
        while len(C) > 1 and C[-1] == 0:
            C.pop()
        if L > lay.t or len(C) - 1 != L:
            raise DecodeError("too many symbol errors")

        def eval_low(p: list[int], x: int) -> int:
            acc = 0
            for c in reversed(p):
                acc = F.mul(acc, x) ^ c
            return acc

        omega = [0] * nsym
        for i, si in enumerate(S):
            for j, cj in enumerate(C):
                if i + j < nsym:
                    omega[i + j] ^= F.mul(si, cj)
        dC = [C[j] if j % 2 == 1 else 0 for j in range(1, len(C))]  # formal derivative

        out = list(syms)
        found = 0
        for pos in range(n):
            degree = n - 1 - pos
            x_inv = F.alpha_pow(-degree)
            if eval_low(C, x_inv) == 0:
                denom = eval_low(dC, x_inv)
                if denom == 0:
                    raise DecodeError("repeated error locator root")
                out[pos] ^= F.mul(eval_low(omega, x_inv), F.inv(denom))
                found += 1
        if found != L:
            raise DecodeError("error locator roots outside the block")
        return out


@lru_cache(maxsize=1)
def _gf8() -> GF2m:
    return GF2m(8, primitive=True)


@lru_cache(maxsize=None)
def code_for(msg_bits: int) -> ReedSolomon:
    return ReedSolomon(msg_bits)


def ec_encode(m: np.ndarray) -> np.ndarray:
    return code_for(len(m)).encode(m)


def ec_decode(c: np.ndarray, msg_bits: int | None = None) -> np.ndarray:
    """Nearest-codeword decoding within the code's correction radius.

    ``msg_bits`` selects the code; without it the message length is
    recovered from ``len(c)`` (the length map is injective).
    """
    if msg_bits is None:
        msg_bits = message_length(len(c))
        if msg_bits is None:
            raise DecodeError(f"{len(c)} is not a codeword length")
    return code_for(msg_bits).decode(c)


@lru_cache(maxsize=None)
def message_length(code_bits: int) -> int | None:
    for x in range(max(1, code_bits // 80), code_bits):
        n = encoded_length(x)
        if n == code_bits:
            return x
        if n > code_bits:
            return None
    return None
