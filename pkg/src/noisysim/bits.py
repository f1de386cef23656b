"""Small helpers around the bit-string representation used everywhere.

A bit string is a 1-D ``numpy.uint8`` array holding 0/1 values.  Substrings
follow half-open indexing; ``substr(s, i, j)`` with ``j > len(s)`` clips to
the end of ``s``.
"""
from __future__ import annotations

from typing import Iterable, Union

import numpy as np

BitLike = Union[str, Iterable[int], np.ndarray]

EMPTY = np.zeros(0, dtype=np.uint8)


def bits(value: BitLike) -> np.ndarray:
    if isinstance(value, np.ndarray):
        return value.astype(np.uint8, copy=False)
    if isinstance(value, str):
        s = value.replace(" ", "").replace("_", "")
        if s and set(s) - {"0", "1"}:
            raise ValueError(f"not a bit string: {value!r}")
        return np.frombuffer(s.encode("ascii"), dtype=np.uint8) - ord("0") if s else EMPTY.copy()
    return np.asarray(list(value), dtype=np.uint8)


def to_str(b: np.ndarray) -> str:
    return (np.asarray(b, dtype=np.uint8) + ord("0")).tobytes().decode("ascii")


def to_int(b: np.ndarray) -> int:
    """Big-endian integer value of a bit string (empty -> 0)."""
    n = len(b)
    if n == 0:
        return 0
    packed = np.packbits(b)
    return int.from_bytes(packed.tobytes(), "big") >> (len(packed) * 8 - n)


def from_int(value: int, width: int) -> np.ndarray:
    if width == 0:
        return EMPTY.copy()
    if value < 0 or value >> width:
        raise ValueError(f"{value} does not fit in {width} bits")
    nbytes = (width + 7) // 8
    raw = np.frombuffer((value << (nbytes * 8 - width)).to_bytes(nbytes, "big"), dtype=np.uint8)
    return np.unpackbits(raw)[:width]


def substr(s: np.ndarray, i: int, j: int) -> np.ndarray:
    return s[i:min(j, len(s))]


def alternations(s: np.ndarray) -> int:
    """Number of indices i with s[i] != s[i+1]."""
    if len(s) < 2:
        return 0
    return int(np.count_nonzero(s[1:] != s[:-1]))


def random_bits(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, 2, size=n, dtype=np.uint8)
