"""Binary extension fields GF(2^m).

Elements are Python ints whose bits are polynomial coefficients over GF(2).
Fields with m <= 16 use exp/log tables built from a primitive polynomial;
larger fields fall back to shift-and-add multiplication, which is all the
AMD tag needs.
"""
from __future__ import annotations

from functools import lru_cache

TABLE_LIMIT = 16


def _pmod(a: int, m: int) -> int:
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def _pmulmod(a: int, b: int, m: int) -> int:
    deg = m.bit_length() - 1
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if (a >> deg) & 1:
            a ^= m
    return r


def _pgcd(a: int, b: int) -> int:
    while b:
        a, b = b, _pmod(a, b)
    return a


def is_irreducible(poly: int) -> bool:
    """Ben-Or test: poly has no factor of degree <= deg/2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    if deg == 1:
        return True
    x = 0b10
    t = x
    for _ in range(deg // 2):
        t = _pmulmod(t, t, poly)
        if _pgcd(poly, t ^ x) != 1:
            return False
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return out


def _ppow(a: int, e: int, m: int) -> int:
    r = 1
    while e:
        if e & 1:
            r = _pmulmod(r, a, m)
        a = _pmulmod(a, a, m)
        e >>= 1
    return r


def _candidates(m: int):
    top = 1 << m
    for k in range(1, m):
        yield top | (1 << k) | 1
    for k3 in range(3, m):
        for k2 in range(2, k3):
            for k1 in range(1, k2):
                yield top | (1 << k3) | (1 << k2) | (1 << k1) | 1


@lru_cache(maxsize=None)
def irreducible_poly(m: int) -> int:
    """Lowest-weight irreducible polynomial of degree m (trinomial if any)."""
    if m < 1:
        raise ValueError("field degree must be >= 1")
    if m == 1:
        return 0b11
    for p in _candidates(m):
        if is_irreducible(p):
            return p
    raise ValueError(f"no low-weight irreducible polynomial of degree {m}")


@lru_cache(maxsize=None)
def primitive_poly(m: int) -> int:
    """Irreducible polynomial for which x generates the multiplicative group."""
    if m == 1:
        return 0b11
    order = (1 << m) - 1
    factors = _prime_factors(order)
    for p in _candidates(m):
        if not is_irreducible(p):
            continue
        if all(_ppow(0b10, order // q, p) != 1 for q in factors):
            return p
    raise ValueError(f"no low-weight primitive polynomial of degree {m}")


class GF2m:
    __slots__ = ("m", "poly", "order", "exp", "log")

    def __init__(self, m: int, primitive: bool = False):
        self.m = m
        self.order = 1 << m
        use_tables = m <= TABLE_LIMIT
        self.poly = primitive_poly(m) if (primitive or use_tables) else irreducible_poly(m)
        self.exp: list[int] | None = None
        self.log: list[int] | None = None
        if use_tables:
            n = self.order - 1
            exp = [0] * (2 * n)
            log = [0] * self.order
            v = 1
            for i in range(n):
                exp[i] = v
                log[v] = i
                v = _pmulmod(v, 0b10, self.poly)
            exp[n:] = exp[:n]
            self.exp, self.log = exp, log

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self.exp is not None:
            return self.exp[self.log[a] + self.log[b]]
        return _pmulmod(a, b, self.poly)

    def pow(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a == 0:
            return 0
        if self.exp is not None:
            return self.exp[(self.log[a] * e) % (self.order - 1)]
        return _ppow(a, e, self.poly)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.exp is not None:
            return self.exp[(self.order - 1 - self.log[a]) % (self.order - 1)]
        return _ppow(a, self.order - 2, self.poly)

    def alpha_pow(self, e: int) -> int:
        """Power of the primitive element x (table fields only)."""
        return self.exp[e % (self.order - 1)]

    def __repr__(self) -> str:
        return f"GF2m(m={self.m}, poly={self.poly:#x})"


@lru_cache(maxsize=None)
def field(m: int) -> GF2m:
    return GF2m(m)
