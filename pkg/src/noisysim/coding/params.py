"""Per-round sizes: word length, key length, AMD strength and padding.

All logarithms are base 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from ..errors import ParameterError
from . import amd, ecc

WORD_CONSTANT = 300
PAD_CONSTANT = 38
MIN_PAD = 95          # anti-silence bound below only proven for b >= 95
KIND_BITS = 2


@dataclass(frozen=True)
class RoundParams:
    round: int
    n: int
    delta: float
    word_len: int
    key_len: int
    eta: float
    pad_len: int
    length_bits: int    # width of the chunk-length field
    payload_len: int    # serialized payload width (same for every kind)
    amd_len: int
    ecc_len: int
    base_len: int       # 300 * ceil(log2(n r / delta))

    @property
    def max_chunk(self) -> int:
        return self.key_len


def _clog2(x: float) -> int:
    return math.ceil(math.log2(x))


def base_word_length(n: int, delta: float, r: int) -> int:
    return WORD_CONSTANT * _clog2(n * r / delta)


def key_length(n: int, delta: float, r: int) -> int:
    return 2 * _clog2(4 * n * math.pi * r / math.sqrt(delta))


def amd_strength(n: int, delta: float, r: int) -> float:
    return delta / (2 * n * n * math.pi ** 2 * r * r)


def pad_length(n: int, delta: float, r: int) -> int:
    return max(MIN_PAD, PAD_CONSTANT * _clog2(2 * n * math.pi * r / math.sqrt(delta)))


def check(n: int, delta: float, r: int) -> None:
    if not isinstance(n, int) or n < 2:
        raise ParameterError(f"need n >= 2 users, got {n!r}")
    if not (0.0 < delta < 1.0):
        raise ParameterError(f"delta must lie in (0, 1), got {delta!r}")
    if not isinstance(r, int) or r < 1:
        raise ParameterError(f"round index must be >= 1, got {r!r}")


@lru_cache(maxsize=65536)
def round_params(n: int, delta: float, r: int) -> RoundParams:
    check(n, delta, r)
    kappa = key_length(n, delta, r)
    eta = amd_strength(n, delta, r)
    pad = pad_length(n, delta, r)
    length_bits = kappa.bit_length()
    payload_len = KIND_BITS + 1 + length_bits + 2 * kappa
    amd_len = amd.encoded_length(payload_len, eta)
    ecc_len = ecc.encoded_length(amd_len)
    base = base_word_length(n, delta, r)
    return RoundParams(
        round=r, n=n, delta=delta,
        word_len=max(base, ecc_len + pad),
        key_len=kappa, eta=eta, pad_len=pad,
        length_bits=length_bits, payload_len=payload_len,
        amd_len=amd_len, ecc_len=ecc_len, base_len=base,
    )
