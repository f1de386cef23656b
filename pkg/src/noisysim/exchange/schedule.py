"""Global round schedule: round r starts at tau(r) and holds four slots of
w_r steps each.  Everything here is a pure function of (n, delta, clock)."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

from ..coding.params import RoundParams, check, round_params

SLOTS_PER_ROUND = 4


@dataclass(frozen=True)
class Slot:
    round: int
    index: int          # 0..3
    start: int
    word_len: int

    @property
    def round_start(self) -> int:
        return self.start - self.index * self.word_len

    @property
    def end(self) -> int:
        """First step after the slot."""
        return self.start + self.word_len


class Schedule:
    def __init__(self, n: int, delta: float):
        check(n, delta, 1)
        self.n = n
        self.delta = delta
        self._starts = [1]          # _starts[r - 1] == tau(r)

    def params(self, r: int) -> RoundParams:
        return round_params(self.n, self.delta, r)

    def word_len(self, r: int) -> int:
        return self.params(r).word_len

    def _extend_to_round(self, r: int) -> None:
        s = self._starts
        while len(s) < r:
            s.append(s[-1] + SLOTS_PER_ROUND * self.word_len(len(s)))

    def tau(self, r: int) -> int:
        if r < 1:
            raise ValueError("rounds are numbered from 1")
        self._extend_to_round(r)
        return self._starts[r - 1]

    def round_of(self, t: int) -> int:
        if t < 1:
            raise ValueError("time steps are numbered from 1")
        s = self._starts
        while s[-1] <= t:
            self._extend_to_round(len(s) + 1)
        return bisect.bisect_right(s, t)

    def locate(self, t: int) -> Slot:
        r = self.round_of(t)
        w = self.word_len(r)
        start = self._starts[r - 1]
        idx = (t - start) // w
        return Slot(r, idx, start + idx * w, w)

    def growth_ratio(self, r: int) -> float:
        """tau(r) / (r log2(n r / delta)), bounded above and below for r >= 2."""
        return self.tau(r) / (r * math.log2(self.n * r / self.delta))
