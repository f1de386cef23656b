"""Prefix-free message languages.

The receiver reassembles a message from chunks and needs to know when it is
done; with a prefix-free language the first complete member is the message.
Strings here are '0'/'1' text.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from enum import Enum
from typing import Iterable

from ..errors import ParameterError


class Completion(Enum):
    COMPLETE = "complete"
    PREFIX = "prefix"
    INVALID = "invalid"


class PrefixFreeLanguage(ABC):
    @abstractmethod
    def is_complete(self, s: str) -> Completion: ...

    def __contains__(self, s: str) -> bool:
        return self.is_complete(s) is Completion.COMPLETE

    def spec(self) -> str:
        """Text form accepted by :func:`parse_language`."""
        raise NotImplementedError


class FixedLength(PrefixFreeLanguage):
    def __init__(self, k: int):
        if k < 1:
            raise ParameterError("fixed-length messages need k >= 1")
        self.k = k

    def is_complete(self, s: str) -> Completion:
        if len(s) == self.k:
            return Completion.COMPLETE
        return Completion.PREFIX if len(s) < self.k else Completion.INVALID

    def spec(self) -> str:
        return f"fixed {self.k}"

    def __repr__(self) -> str:
        return f"FixedLength({self.k})"


def gamma_header(n: int) -> str:
    """Elias gamma code of n >= 1."""
    if n < 1:
        raise ParameterError("gamma code needs n >= 1")
    b = bin(n)[2:]
    return "0" * (len(b) - 1) + b


class LengthPrefixed(PrefixFreeLanguage):
    """Arbitrary non-empty bodies framed as gamma(len(body)) || body."""

    def frame(self, body: str) -> str:
        return gamma_header(len(body)) + body

    def unframe(self, s: str) -> str:
        z = len(s) - len(s.lstrip("0"))
        n = int(s[z:2 * z + 1], 2)
        return s[2 * z + 1:2 * z + 1 + n]

    def is_complete(self, s: str) -> Completion:
        z = len(s) - len(s.lstrip("0"))
        if len(s) < 2 * z + 1:
            return Completion.PREFIX
        n = int(s[z:2 * z + 1], 2)
        total = 2 * z + 1 + n
        if len(s) == total:
            return Completion.COMPLETE
        return Completion.PREFIX if len(s) < total else Completion.INVALID

    def spec(self) -> str:
        return "gamma"

    def __repr__(self) -> str:
        return "LengthPrefixed()"


class FiniteSet(PrefixFreeLanguage):
    def __init__(self, words: Iterable[str]):
        ws = sorted(set(words))
        if not ws or any(not w or set(w) - {"0", "1"} for w in ws):
            raise ParameterError("a finite language needs non-empty binary words")
        # after sorting, a prefix sits right before some word extending it
        for a, b in zip(ws, ws[1:]):
            if b.startswith(a):
                raise ParameterError(f"{a!r} is a prefix of {b!r}")
        self.words = frozenset(ws)
        self._prefixes = {w[:i] for w in ws for i in range(len(w))}

    def is_complete(self, s: str) -> Completion:
        if s in self.words:
            return Completion.COMPLETE
        return Completion.PREFIX if s in self._prefixes else Completion.INVALID

    def spec(self) -> str:
        return "set " + " ".join(sorted(self.words))

    def __repr__(self) -> str:
        return f"FiniteSet({sorted(self.words)})"


def parse_language(text: str) -> PrefixFreeLanguage:
    parts = text.split()
    if not parts:
        raise ParameterError("empty language spec")
    head, rest = parts[0], parts[1:]
    if head == "fixed" and len(rest) == 1:
        return FixedLength(int(rest[0]))
    if head == "gamma" and not rest:
        return LengthPrefixed()
    if head == "set" and rest:
        return FiniteSet(rest)
    raise ParameterError(f"unknown language spec {text!r}")
