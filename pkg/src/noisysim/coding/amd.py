"""Algebraic manipulation detection (AMD) code.

Polynomial construction over GF(2^b): the message is split into d field
elements s_1..s_d (zero padded), a fresh random nonce x is drawn and the
codeword is

    m || x || f(x, s),   f(x, s) = x^(d+2) + sum_i s_i x^i

For any nonzero additive offset the shifted word is a codeword for at most
d+1 values of x, so detection fails with probability <= (d+1)/2^b.  The
pair (d, b) is the smallest b with (d+1)/2^b <= eta, d odd (d+2 must not be
divisible by the field characteristic).  The tag therefore costs 2b bits,
which is 2*ceil(log2(1/eta)) plus about 2*log2(d+1).
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ..bits import from_int, to_int
from ..errors import ParameterError
from .gf import field


def check_eta(eta: float) -> None:
    if not (0.0 < eta <= 0.5):
        raise ParameterError(f"AMD strength must lie in (0, 1/2], got {eta!r}")


@lru_cache(maxsize=4096)
def tag_shape(msg_len: int, eta: float) -> tuple[int, int]:
    """(d, b): number of message field elements and the field degree."""
    check_eta(eta)
    if msg_len < 1:
        raise ParameterError("AMD messages must be non-empty")
    b = max(1, math.ceil(math.log2(1.0 / eta)))
    while True:
        d = -(-msg_len // b)
        if d % 2 == 0:
            d += 1
        if (d + 1) <= eta * (1 << b):
            return d, b
        b += 1


def tag_length(msg_len: int, eta: float) -> int:
    return 2 * tag_shape(msg_len, eta)[1]


def encoded_length(msg_len: int, eta: float) -> int:
    return msg_len + tag_length(msg_len, eta)


@lru_cache(maxsize=4096)
def message_length(code_len: int, eta: float) -> int | None:
    """Inverse of ``encoded_length``; None when no message length maps to it."""
    check_eta(eta)
    lo = max(1, code_len - 2 * 128)
    for x in range(code_len - 1, lo - 1, -1):
        n = encoded_length(x, eta)
        if n == code_len:
            return x
        if n < code_len:
            return None
    return None


def _elements(m: np.ndarray, d: int, b: int) -> list[int]:
    value = to_int(m) << (d * b - len(m))
    mask = (1 << b) - 1
    return [(value >> (b * (d - 1 - i))) & mask for i in range(d)]


def _tag(x: int, s: list[int], b: int) -> int:
    F = field(b)
    # Horner over x^(d+2) + s_d x^d + ... + s_1 x
    acc = x
    for i in range(len(s) - 1, -1, -1):
        acc = F.mul(acc, x) ^ s[i]
    return F.mul(acc, x)


def amd_encode(m: np.ndarray, eta: float, rng: np.random.Generator) -> np.ndarray:
    d, b = tag_shape(len(m), eta)
    x = int(rng.integers(0, 1 << b)) if b < 63 else int.from_bytes(rng.bytes((b + 7) // 8), "big") >> (-b % 8)
    tag = _tag(x, _elements(m, d, b), b)
    return np.concatenate([m.astype(np.uint8, copy=False), from_int(x, b), from_int(tag, b)])


def _split(c: np.ndarray, eta: float):
    x_len = message_length(len(c), eta)
    if x_len is None:
        return None
    d, b = tag_shape(x_len, eta)
    m = c[:x_len]
    x = to_int(c[x_len:x_len + b])
    t = to_int(c[x_len + b:])
    return m, x, t, d, b


def amd_is_codeword(c: np.ndarray, eta: float) -> bool:
    check_eta(eta)
    parts = _split(c, eta)
    if parts is None:
        return False
    m, x, t, d, b = parts
    return _tag(x, _elements(m, d, b), b) == t


def amd_decode(c: np.ndarray, eta: float) -> np.ndarray | None:
    """Message carried by ``c``, or None when ``c`` is not a codeword."""
    check_eta(eta)
    parts = _split(c, eta)
    if parts is None:
        return None
    m, x, t, d, b = parts
    if _tag(x, _elements(m, d, b), b) != t:
        return None
    return m.copy()
