"""Slow, independent reference computations used by the tests.

Nothing here calls into the arithmetic of the package under test; field
moduli are the only values taken from it.
"""
from __future__ import annotations

import math
from itertools import product


def poly_mulmod(a: int, b: int, mod: int) -> int:
    """Carry-less product followed by long division."""
    prod = 0
    i = 0
    while b >> i:
        if (b >> i) & 1:
            prod ^= a << i
        i += 1
    deg = mod.bit_length() - 1
    while prod.bit_length() - 1 >= deg:
        prod ^= mod << (prod.bit_length() - 1 - deg)
    return prod


def poly_pow(a: int, e: int, mod: int) -> int:
    r = 1
    for _ in range(e):
        r = poly_mulmod(r, a, mod)
    return r


def amd_tag(msg: str, x: int, d: int, b: int, mod: int) -> int:
    """x^(d+2) + sum_{i=1..d} s_i x^i with s_1 the first b bits of msg."""
    padded = msg + "0" * (d * b - len(msg))
    s = [int(padded[i * b:(i + 1) * b], 2) for i in range(d)]
    acc = poly_pow(x, d + 2, mod)
    for i, si in enumerate(s, start=1):
        acc ^= poly_mulmod(si, poly_pow(x, i, mod), mod)
    return acc


def amd_codebook(msg_bits: int, d: int, b: int, mod: int) -> dict[str, str]:
    """Every codeword of the AMD code mapped to its message."""
    book = {}
    for m in product("01", repeat=msg_bits):
        msg = "".join(m)
        for x in range(1 << b):
            word = msg + format(x, f"0{b}b") + format(amd_tag(msg, x, d, b, mod), f"0{b}b")
            book[word] = msg
    return book


def alternations(s: str) -> int:
    return sum(1 for a, c in zip(s, s[1:]) if a != c)


def silent(s: str) -> bool:
    return 3 * alternations(s) < len(s)


def hamming(a, b) -> int:
    return sum(int(x) != int(y) for x, y in zip(a, b))


def clog2(x: float) -> int:
    return math.ceil(math.log2(x))


def word_length_formula(n: int, delta: float, r: int) -> int:
    return 300 * clog2(n * r / delta)


def key_length_formula(n: int, delta: float, r: int) -> int:
    return 2 * clog2(4 * n * math.pi * r / math.sqrt(delta))


def pad_formula(n: int, delta: float, r: int) -> int:
    return max(95, 38 * clog2(2 * n * math.pi * r / math.sqrt(delta)))


def tau_by_sum(word_lengths: list[int], r: int) -> int:
    """1 + 4 * (w_1 + ... + w_{r-1})."""
    return 1 + 4 * sum(word_lengths[:r - 1])
