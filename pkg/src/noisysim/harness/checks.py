"""Monte-Carlo checks of the coding layer and the schedule.

Each check returns a plain dict with the measured quantities, the bound it
is held to and a ``passed`` flag.  The harness runs them from config files
with ``kind = <check name>``; the acceptance suite calls them directly.
"""
from __future__ import annotations

import math
import time

import numpy as np

from ..bits import random_bits
from ..coding import amd, ecc
from ..coding.params import round_params
from ..coding.word import Kind, Payload, decode_word, encode_word
from ..exchange.schedule import Schedule


def sigma(p: float, trials: int) -> float:
    return math.sqrt(p * (1 - p) / trials)


def codec_roundtrip(trials: int = 1000, rounds=range(1, 65), ns=(2, 8), deltas=(0.1, 0.01),
                    seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    rounds, ns, deltas = list(rounds), list(ns), list(deltas)
    failures = 0
    t0 = time.perf_counter()
    for _ in range(trials):
        n = ns[int(rng.integers(len(ns)))]
        d = deltas[int(rng.integers(len(deltas)))]
        r = rounds[int(rng.integers(len(rounds)))]
        p = round_params(n, d, r)
        kind = Kind(int(rng.integers(1, 4)))
        key = random_bits(rng, p.key_len)
        if kind == Kind.KEY_REQUEST:
            payload = Payload.key_request(key)
        elif kind == Kind.KEY_REPLY:
            payload = Payload.key_reply(random_bits(rng, p.key_len), key)
        else:
            payload = Payload.chunk(random_bits(rng, int(rng.integers(1, p.key_len + 1))),
                                    int(rng.integers(2)), key)
        back = decode_word(encode_word(payload, p, rng), p, kind)
        failures += back != payload
    secs = time.perf_counter() - t0
    return {"check": "codec_roundtrip", "trials": trials, "failures": int(failures),
            "seconds": secs, "passed": failures == 0 and secs < 60}


def amd_detection(eta: float, trials: int = 100_000, msg_bits: int = 8, seed: int = 0,
                  offsets: str = "random") -> dict:
    """Fraction of nonzero offsets that turn a fresh codeword into another
    codeword.  ``offsets='random'`` draws a new offset per trial;
    ``'fixed'`` keeps one offset for the whole batch (the worst case of the
    guarantee is per offset)."""
    rng = np.random.default_rng(seed)
    n = amd.encoded_length(msg_bits, eta)
    fixed = None
    if offsets == "fixed":
        fixed = random_bits(rng, n)
        while not fixed.any():
            fixed = random_bits(rng, n)
    fooled = 0
    t0 = time.perf_counter()
    for _ in range(trials):
        c = amd.amd_encode(random_bits(rng, msg_bits), eta, rng)
        delta = fixed
        if delta is None:
            delta = random_bits(rng, n)
            while not delta.any():
                delta = random_bits(rng, n)
        fooled += amd.amd_is_codeword(c ^ delta, eta)
    rate = fooled / trials
    bound = eta + 3 * sigma(eta, trials)
    return {"check": "amd_detection", "eta": eta, "offsets": offsets, "trials": trials,
            "msg_bits": msg_bits, "failures": int(fooled), "rate": rate, "bound": bound,
            "seconds": time.perf_counter() - t0, "passed": rate <= bound}


def flip_pattern(kind: str, code_bits: int, flips: int, m: int, pad: int,
                 rng: np.random.Generator) -> np.ndarray:
    """Positions of ``flips`` bit errors in a ``code_bits`` word.

    burst:   one contiguous run
    spread:  one flip per symbol as far as possible, then a second round
    random:  uniform without replacement
    """
    if kind == "burst":
        start = int(rng.integers(code_bits - flips + 1))
        return np.arange(start, start + flips)
    if kind == "random":
        return rng.choice(code_bits, size=flips, replace=False)
    if kind == "spread":
        # symbol s covers bits [s*m - pad, (s+1)*m - pad) of the sent word
        order = []
        for layer in range(m):
            for s in range(-(-(code_bits + pad) // m)):
                pos = s * m - pad + (layer * 5 + s) % m
                if 0 <= pos < code_bits and pos not in order:
                    order.append(pos)
                if len(order) == flips:
                    return np.array(order)
        rest = [p for p in range(code_bits) if p not in set(order)]
        return np.array(order + rest[:flips - len(order)])
    raise ValueError(f"unknown flip pattern {kind!r}")


def ecc_tolerance(sizes=(8, 35, 59, 135), trials: int = 1000,
                  patterns=("burst", "spread", "random"), seed: int = 0) -> dict:
    """Decode after floor(|c|/3) flips for each size and flip pattern."""
    rng = np.random.default_rng(seed)
    rows = []
    for size in sizes:
        lay = ecc.layout(size)
        code = ecc.code_for(size)
        flips = lay.code_bits // 3
        for pat in patterns:
            bad = 0
            for _ in range(trials):
                msg = random_bits(rng, size)
                c = code.encode(msg)
                pos = flip_pattern(pat, lay.code_bits, flips, lay.m, lay.pad, rng)
                c[pos] ^= 1
                try:
                    ok = np.array_equal(code.decode(c), msg)
                except ecc.DecodeError:
                    ok = False
                bad += not ok
            rows.append({"msg_bits": size, "code_bits": lay.code_bits, "flips": flips,
                         "pattern": pat, "failures": bad, "trials": trials})
    return {"check": "ecc_tolerance", "rows": rows,
            "passed": all(r["failures"] == 0 for r in rows)}


def anti_silence(b: int = 95, samples: int = 100_000, seed: int = 0, chunk: int = 20_000) -> dict:
    rng = np.random.default_rng(seed)
    silent = 0
    left = samples
    while left:
        k = min(chunk, left)
        x = rng.integers(0, 2, size=(k, b), dtype=np.uint8)
        alt = np.count_nonzero(x[:, 1:] != x[:, :-1], axis=1)
        silent += int(np.count_nonzero(3 * alt < b))
        left -= k
    p = math.exp(-b / 19)
    rate = silent / samples
    bound = p + 3 * sigma(p, samples)
    return {"check": "anti_silence", "b": b, "samples": samples, "silent": silent,
            "rate": rate, "bound": bound, "passed": rate <= bound}


def schedule_law(n: int = 2, delta: float = 0.1, r_max: int = 10_000,
                 bounds: tuple[float, float] = (300.0, 1800.0)) -> dict:
    s = Schedule(n, delta)
    mismatches = 0
    prev = s.tau(1)
    ok_base = prev == 1
    for r in range(2, r_max + 1):
        cur = s.tau(r)
        mismatches += cur != prev + 4 * s.word_len(r - 1)
        prev = cur
    ratios = [s.growth_ratio(r) for r in range(2, r_max + 1)]
    lo, hi = min(ratios), max(ratios)
    return {"check": "schedule_law", "n": n, "delta": delta, "r_max": r_max,
            "recurrence_mismatches": int(mismatches), "tau_1_is_1": ok_base,
            "ratio_min": lo, "ratio_max": hi, "bounds": list(bounds),
            "passed": ok_base and not mismatches and bounds[0] <= lo and hi <= bounds[1]}


CHECKS = {
    "codec_roundtrip": codec_roundtrip,
    "amd_detection": amd_detection,
    "ecc_tolerance": ecc_tolerance,
    "anti_silence": anti_silence,
    "schedule_law": schedule_law,
}


def _num(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


LIST_KEYS = {"sizes", "patterns", "ns", "deltas", "rounds"}
TEXT_KEYS = {"patterns", "offsets"}


def run_check(kind: str, params: dict[str, str], n: int, delta: float, seed: int) -> dict:
    """Run a named check with string parameters from a config file."""
    prm = {}
    for k, v in params.items():
        conv = str if k in TEXT_KEYS else _num
        prm[k] = tuple(conv(x) for x in v.split()) if k in LIST_KEYS else conv(v)
    if kind == "schedule_law":
        prm.setdefault("n", n)
        prm.setdefault("delta", delta)
        return schedule_law(**prm)
    if kind == "codec_roundtrip" and "rounds" in prm:
        lo, hi = prm.pop("rounds")
        prm["rounds"] = range(int(lo), int(hi) + 1)
    prm.setdefault("seed", seed)
    return CHECKS[kind](**prm)
