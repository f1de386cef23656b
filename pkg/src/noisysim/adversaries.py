"""Budget-limited adversary strategies.

Every strategy sees only :class:`AdversaryView` (clock, schedule, topology,
parameters and the protocol specification) plus its own seeded RNG.  Plans
are made once per word slot and replayed for whatever part of the slot the
simulator asks about, so stepping one bit at a time and advancing whole
slots yield the same actions.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from .bits import alternations
from .coding.params import round_params
from .coding.word import Payload, encode_word
from .errors import ConfigurationError
from .netsim import FLIP, SET_IDLE, AdversaryAction, AdversaryView

KINDS = ("none", "uniform_random", "burst", "word_corruptor", "silence_forger",
         "key_guesser", "feedback_jammer")


@dataclass
class AdversarySpec:
    kind: str = "none"
    budget: int = 0
    seed: int = 0
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown adversary kind {self.kind!r}")
        if self.budget < 0:
            raise ConfigurationError("budget must be non-negative")


# public-structure helpers --------------------------------------------------
def talking_channels(view: AdversaryView) -> list[tuple[int, int]]:
    """(forward lane, back lane) of channels whose initiator sends in pi."""
    out = []
    for lane, src, dst, init in view.topology:
        if src == init and (view.pi is None or dst in view.pi.automata[src].targets()):
            out.append((lane, lane + 1))
    return out


def quiet_channels(view: AdversaryView) -> list[tuple[int, int]]:
    """Channels whose initiator never sends in pi: always-silent forward lanes."""
    if view.pi is None:
        return []
    out = []
    for lane, src, dst, init in view.topology:
        if src == init and dst not in view.pi.automata[src].targets():
            out.append((lane, lane + 1))
    return out


def corruption_cost(ecc_len: int) -> int:
    """Flips spent on a word: just over a third of its error-corrected part."""
    return -(-ecc_len // 3) + 1


class SlotAdversary:
    """Base class: ``plan`` is called once per slot start."""

    def __init__(self, budget: int, seed: int):
        self.budget = budget
        self.spent = 0
        self.rng = np.random.default_rng(np.random.SeedSequence([seed, 0x616476]))
        self._slot = None
        self._plan: list[AdversaryAction] = []

    def can_spend(self, cost: int) -> bool:
        return self.spent + cost <= self.budget

    def spend(self, cost: int) -> None:
        self.spent += cost

    def plan(self, view: AdversaryView) -> list[AdversaryAction]:
        return []

    def actions(self, view: AdversaryView) -> Iterable[AdversaryAction]:
        if view.slot_start != self._slot:
            self._slot = view.slot_start
            self._plan = sorted(self.plan(view), key=lambda a: (a.time, a.lane))
        if not self._plan:
            return ()
        lo, hi = view.clock, view.clock + view.steps
        return [a for a in self._plan if lo <= a.time < hi]

    def flips_at(self, lane: int, start: int, positions: Iterable[int]) -> list[AdversaryAction]:
        return [AdversaryAction(start + int(p), lane, FLIP) for p in positions]


class NoAdversary(SlotAdversary):
    def actions(self, view: AdversaryView) -> Iterable[AdversaryAction]:
        return ()


class UniformRandom:
    """Budget spent on distinct (step, lane) pairs drawn uniformly over a
    horizon fixed at setup."""

    def __init__(self, budget: int, seed: int, horizon: int, lanes: int):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x756E69]))
        cells = horizon * lanes
        k = min(budget, cells)
        picks = np.sort(rng.choice(cells, size=k, replace=False)) if k else np.zeros(0, np.int64)
        self.times = (picks // lanes + 1).tolist()
        self.lanes = (picks % lanes).tolist()

    def actions(self, view: AdversaryView) -> Iterable[AdversaryAction]:
        lo = bisect.bisect_left(self.times, view.clock)
        hi = bisect.bisect_left(self.times, view.clock + view.steps)
        return [AdversaryAction(self.times[i], self.lanes[i], FLIP) for i in range(lo, hi)]


class Burst(SlotAdversary):
    """One contiguous burst per round on a random lane and slot."""

    def __init__(self, budget: int, seed: int, length: int = 64, every: int = 1):
        super().__init__(budget, seed)
        self.length = length
        self.every = max(1, every)
        self._target: tuple[int, int] | None = None

    def plan(self, view: AdversaryView) -> list[AdversaryAction]:
        if view.slot == 0:
            self._target = None
            if (view.round - 1) % self.every == 0:
                self._target = (int(self.rng.integers(4)), int(self.rng.integers(len(view.topology))))
        if self._target is None or self._target[0] != view.slot:
            return []
        k = min(self.length, view.word_len, self.budget - self.spent)
        if k <= 0:
            return []
        lane = self._target[1]
        off = int(self.rng.integers(view.word_len - k + 1))
        self.spend(k)
        start = view.slot_start + off
        return [AdversaryAction(start + i, lane, FLIP) for i in range(k)]


class WordCorruptor(SlotAdversary):
    """Kills message-chunk words (slot index 2) on talking channels with
    just over a third of the ECC region flipped, while budget lasts."""

    def __init__(self, budget: int, seed: int, rounds: set[int] | None = None):
        super().__init__(budget, seed)
        self.rounds = rounds

    def corrupt(self, view: AdversaryView, lane: int) -> list[AdversaryAction]:
        p = round_params(view.n, view.delta, view.round)
        cost = corruption_cost(p.ecc_len)
        if not self.can_spend(cost):
            return []
        self.spend(cost)
        pos = self.rng.choice(p.ecc_len, size=cost, replace=False)
        return self.flips_at(lane, view.slot_start, pos)

    def plan(self, view: AdversaryView) -> list[AdversaryAction]:
        if view.slot != 2 or (self.rounds is not None and view.round not in self.rounds):
            return []
        out = []
        for fwd, _ in talking_channels(view):
            out += self.corrupt(view, fwd)
        return out


class FeedbackJammer(WordCorruptor):
    """Attacks only the receiver's words: the key reply (slot 1) or the
    acknowledging silence (slot 3), chosen at random per round and channel."""

    def __init__(self, budget: int, seed: int, rounds: set[int] | None = None):
        super().__init__(budget, seed, rounds)
        self._target: dict[int, int] = {}

    def plan(self, view: AdversaryView) -> list[AdversaryAction]:
        if self.rounds is not None and view.round not in self.rounds:
            return []
        if view.slot == 0:
            self._target = {fwd: 1 + 2 * int(self.rng.integers(2)) for fwd, _ in talking_channels(view)}
            return []
        out = []
        for fwd, back in talking_channels(view):
            if self._target.get(fwd) != view.slot:
                continue
            if view.slot == 1:
                out += self.corrupt(view, back)
            elif view.slot == 3:
                out += self.unsilence(view, back)
        return out

    def unsilence(self, view: AdversaryView, lane: int) -> list[AdversaryAction]:
        w = view.word_len
        cost = -(-w // 3) + 1
        if not self.can_spend(cost):
            return []
        self.spend(cost)
        pos = 1 + self.rng.choice(w - 1, size=cost, replace=False)
        return self.flips_at(lane, view.slot_start, pos)


class SilenceForger(WordCorruptor):
    """Provokes a noise answer by corrupting the chunk, then XORs a fixed
    mask onto the answer hoping to make it read as silence."""

    def __init__(self, budget: int, seed: int, mask: str = "alternating"):
        super().__init__(budget, seed)
        if mask not in ("alternating", "random"):
            raise ConfigurationError(f"unknown mask {mask!r}")
        self.mask = mask
        self._armed: set[int] = set()
        self.attempts = 0

    def mask_bits(self, w: int) -> np.ndarray:
        if self.mask == "alternating":
            return (np.arange(w) & 1).astype(np.uint8)
        return self.rng.integers(0, 2, w, dtype=np.uint8)

    def plan(self, view: AdversaryView) -> list[AdversaryAction]:
        p = round_params(view.n, view.delta, view.round)
        w = view.word_len
        if view.slot == 2:
            self._armed = set()
            out = []
            for fwd, back in talking_channels(view):
                # only attack when the mask on the answer is affordable too
                if self.can_spend(corruption_cost(p.ecc_len) + w // 2 + 1):
                    acts = self.corrupt(view, fwd)
                    if acts:
                        self._armed.add(back)
                        out += acts
            return out
        if view.slot == 3:
            out = []
            for back in sorted(self._armed):
                mask = self.mask_bits(w)
                pos = np.flatnonzero(mask)
                if not self.can_spend(len(pos)):
                    continue
                self.spend(len(pos))
                self.attempts += 1
                out += self.flips_at(back, view.slot_start, pos)
            self._armed = set()
            return out
        return []


class KeyGuesser(SlotAdversary):
    """Writes forged key requests onto channels whose initiator never talks,
    then injects a chunk keyed with a guess of the receiver's key."""

    def __init__(self, budget: int, seed: int, content: str = "1"):
        super().__init__(budget, seed)
        self.content = np.array([int(c) for c in content], dtype=np.uint8)
        self._injecting: set[int] = set()
        self._idle: dict[int, int] = {}     # our belief about each lane's held value
        self._fresh: set[int] = set()       # lanes whose silent run starts at t=1
        self.forged_requests = 0
        self.injections = 0

    def forged_word(self, view: AdversaryView, payload: Payload) -> np.ndarray:
        p = round_params(view.n, view.delta, view.round)
        w = encode_word(payload, p, self.rng)
        body = w[:p.ecc_len]
        # pad with as few alternations as still clear the silence test
        need = -(-p.word_len // 3) - alternations(body) + 1
        pad = np.full(p.word_len - p.ecc_len, body[-1], dtype=np.uint8)
        if need > 0:
            step = max(1, len(pad) // (need + 1))
            cur = int(body[-1])
            for i in range(need):
                cur ^= 1
                pad[(i + 1) * step:] = cur
        return np.concatenate([body, pad])

    def write(self, view: AdversaryView, lane: int, word: np.ndarray) -> list[AdversaryAction]:
        held = self._idle.get(lane, 0)
        start = view.slot_start
        first_free = lane in self._fresh and start == 1
        cost = alternations(word) + (0 if first_free or word[0] == held else 1)
        if not self.can_spend(cost):
            return []
        self.spend(cost)
        acts = [AdversaryAction(start, lane, SET_IDLE, int(word[0]))]
        flips = np.flatnonzero(word[1:] != word[:-1]) + 1
        acts += self.flips_at(lane, start, flips)
        self._idle[lane] = int(word[-1])
        return acts

    def plan(self, view: AdversaryView) -> list[AdversaryAction]:
        quiet = quiet_channels(view)
        if view.clock == 1:
            self._fresh = {fwd for fwd, _ in quiet}
        p = round_params(view.n, view.delta, view.round)
        out = []
        if view.slot == 0:
            self._injecting = set()
            for fwd, _ in quiet:
                # only forge when a follow-up injection is affordable too
                if not self.can_spend(2 * (p.word_len // 3 + 2) + 2):
                    continue
                key = self.rng.integers(0, 2, p.key_len, dtype=np.uint8)
                acts = self.write(view, fwd, self.forged_word(view, Payload.key_request(key)))
                if acts:
                    self.forged_requests += 1
                    self._injecting.add(fwd)
                    out += acts
        elif view.slot == 2:
            for fwd in sorted(self._injecting):
                guess = self.rng.integers(0, 2, p.key_len, dtype=np.uint8)
                chunk = Payload.chunk(self.content[:p.key_len], 0, guess)
                acts = self.write(view, fwd, self.forged_word(view, chunk))
                if acts:
                    self.injections += 1
                    out += acts
            self._injecting = set()
        return out


def build_adversary(spec: AdversarySpec, horizon: int | None = None, lanes: int | None = None):
    """Instantiate the strategy described by ``spec``.  ``uniform_random``
    needs the horizon (steps) and the lane count."""
    k, T, s, prm = spec.kind, spec.budget, spec.seed, dict(spec.params)
    if k == "none" or T == 0:
        return NoAdversary(T, s)
    if k == "uniform_random":
        if horizon is None or lanes is None:
            raise ConfigurationError("uniform_random needs a horizon and lane count")
        return UniformRandom(T, s, int(prm.get("horizon", horizon)), lanes)
    if k == "burst":
        return Burst(T, s, int(prm.get("length", 64)), int(prm.get("every", 1)))
    if k == "word_corruptor":
        return WordCorruptor(T, s, _rounds(prm))
    if k == "feedback_jammer":
        return FeedbackJammer(T, s, _rounds(prm))
    if k == "silence_forger":
        return SilenceForger(T, s, str(prm.get("mask", "alternating")))
    if k == "key_guesser":
        return KeyGuesser(T, s, str(prm.get("content", "1")))
    raise ConfigurationError(f"unknown adversary kind {k!r}")


def _rounds(prm: dict) -> set[int] | None:
    r = prm.get("rounds")
    if r is None or r == "":
        return None
    if isinstance(r, str):
        return {int(x) for x in r.replace(",", " ").split()}
    return set(r)


__all__ = [
    "AdversarySpec", "KINDS", "build_adversary", "NoAdversary", "UniformRandom", "Burst",
    "WordCorruptor", "FeedbackJammer", "SilenceForger", "KeyGuesser", "corruption_cost",
    "talking_channels", "quiet_channels",
]
