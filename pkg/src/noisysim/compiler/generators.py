"""Built-in protocol families with tunable total length L and average message
length alpha."""
from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from ..exchange.languages import FiniteSet, FixedLength, LengthPrefixed
from .automaton import IN, OUT, WILDCARD, Action, Automaton, Protocol, Transition


def _out(src: str, peer: int, msg: str, dst: str) -> Transition:
    return Transition(src, Action(OUT, peer, msg), dst)


def _in(src: str, peer: int, msg: str, dst: str) -> Transition:
    return Transition(src, Action(IN, peer, msg), dst)


def ping_pong(ping: str = "1", pong: str = "0") -> Protocol:
    """Node 0 sends ``ping``; node 1 answers ``pong``; both terminate."""
    a0 = Automaton(0, "s0", [
        _out("s0", 1, ping, "wait"),
        _in("wait", 1, pong, "done"),
        _in("wait", 1, WILDCARD, "bad"),
    ], {"done": pong, "bad": "bad"})
    a1 = Automaton(1, "wait", [
        _in("wait", 0, ping, "reply"),
        _in("wait", 0, WILDCARD, "bad"),
        _out("reply", 0, pong, "done"),
    ], {"done": ping, "bad": "bad"})
    langs = {(0, 1): FixedLength(len(ping)), (1, 0): FixedLength(len(pong))}
    return Protocol([a0, a1], langs, name="ping_pong", confluent=True)


def token_ring(n: int, laps: int = 1, token: str = "1") -> Protocol:
    """Node 0 passes ``token`` around the ring ``laps`` times."""
    if n < 2 or laps < 1:
        raise ParameterError("token ring needs n >= 2 and laps >= 1")
    autos = []
    for u in range(n):
        nxt, prv = (u + 1) % n, (u - 1) % n
        trs = []
        if u == 0:
            for lap in range(laps):
                trs.append(_out(f"s{lap}", nxt, token, f"w{lap}"))
                trs.append(_in(f"w{lap}", prv, token, f"s{lap + 1}"))
                trs.append(_in(f"w{lap}", prv, WILDCARD, "bad"))
            final = f"s{laps}"
        else:
            for lap in range(laps):
                trs.append(_in(f"s{lap}", prv, token, f"f{lap}"))
                trs.append(_in(f"s{lap}", prv, WILDCARD, "bad"))
                trs.append(_out(f"f{lap}", nxt, token, f"s{lap + 1}"))
            final = f"s{laps}"
        autos.append(Automaton(u, "s0", trs, {final: str(laps), "bad": "bad"}))
    langs = {(u, (u + 1) % n): FixedLength(len(token)) for u in range(n)}
    edges = [(u, (u + 1) % n) for u in range(n)]
    return Protocol(autos, langs, edges, name="token_ring", confluent=True)


def broadcast_tree(n: int, value: str = "101") -> Protocol:
    """Node 0 broadcasts ``value`` down the binary tree i -> 2i+1, 2i+2."""
    if n < 2:
        raise ParameterError("broadcast needs n >= 2")
    autos = []
    for u in range(n):
        kids = [c for c in (2 * u + 1, 2 * u + 2) if c < n]
        trs = []
        state = "have" if u == 0 else "wait"
        if u:
            parent = (u - 1) // 2
            trs.append(_in("wait", parent, value, "have"))
            trs.append(_in("wait", parent, WILDCARD, "bad"))
        cur = "have"
        for i, c in enumerate(kids):
            nxt = f"sent{i}"
            trs.append(_out(cur, c, value, nxt))
            cur = nxt
        autos.append(Automaton(u, state, trs, {cur: value, "bad": "bad"}))
    langs = {((c - 1) // 2, c): FixedLength(len(value)) for c in range(1, n)}
    edges = [((c - 1) // 2, c) for c in range(1, n)]
    return Protocol(autos, langs, edges, name="broadcast_tree", confluent=True)


def star_race(first: str = "0", second: str = "1") -> Protocol:
    """Leaves 1 and 2 each send one message to centre 0 at the same time;
    the centre accepts them in either order."""
    words = FiniteSet([first, second])
    centre = Automaton(0, "w", [
        _in("w", 1, first, "g1"), _in("w", 1, second, "g1"),
        _in("w", 2, first, "g2"), _in("w", 2, second, "g2"),
        _in("g1", 2, first, "done"), _in("g1", 2, second, "done"),
        _in("g2", 1, first, "done"), _in("g2", 1, second, "done"),
        # a leaf sends only once; these keep the centre input-enabled
        _in("g1", 1, WILDCARD, "g1"), _in("g2", 2, WILDCARD, "g2"),
    ], {"done": "both"})
    leaf1 = Automaton(1, "s", [_out("s", 0, first, "done")], {"done": "sent"})
    leaf2 = Automaton(2, "s", [_out("s", 0, second, "done")], {"done": "sent"})
    return Protocol([centre, leaf1, leaf2], {(1, 0): words, (2, 0): words},
                    [(0, 1), (0, 2)], name="star_race", confluent=True)


def parse_lengths(spec: str) -> tuple[str, int, int]:
    """``fixed:K`` or ``uniform:A:B`` (body lengths, inclusive)."""
    parts = spec.split(":")
    if parts[0] == "fixed" and len(parts) == 2:
        k = int(parts[1])
        lo = hi = k
    elif parts[0] == "uniform" and len(parts) == 3:
        lo, hi = int(parts[1]), int(parts[2])
    else:
        raise ParameterError(f"unknown length distribution {spec!r}")
    if not (1 <= lo <= hi):
        raise ParameterError(f"bad length range in {spec!r}")
    return parts[0], lo, hi


def random_pipeline(n: int, L: int, lengths: str = "fixed:1", seed: int = 0) -> Protocol:
    """Path 0 - 1 - ... - (n-1); node i streams its own messages to i+1.

    Messages are drawn until their total length reaches ``L``, dealt out to
    the n - 1 links in turn so that all links work in parallel.  With
    ``fixed:K`` messages are K raw bits; with ``uniform:A:B`` the body
    length is uniform in [A, B] and messages are length-prefixed.
    """
    if n < 2 or L < 1:
        raise ParameterError("pipeline needs n >= 2 and L >= 1")
    kind, lo, hi = parse_lengths(lengths)
    rng = np.random.default_rng(seed)
    framing = FixedLength(lo) if kind == "fixed" else LengthPrefixed()
    streams: list[list[str]] = [[] for _ in range(n - 1)]
    total, i = 0, 0
    while total < L:
        body = "".join(map(str, rng.integers(0, 2, int(rng.integers(lo, hi + 1)))))
        msg = body if kind == "fixed" else framing.frame(body)
        streams[i % (n - 1)].append(msg)
        total += len(msg)
        i += 1

    autos = []
    for u in range(n):
        trs = []
        sends = streams[u] if u < n - 1 else []
        recvs = streams[u - 1] if u > 0 else []
        for j, msg in enumerate(sends):
            trs.append(_out(f"o{j}", u + 1, msg, f"o{j + 1}"))
        # after the sends, wait for the upstream stream in order
        state = f"o{len(sends)}"
        for j, msg in enumerate(recvs):
            nxt = f"r{j + 1}"
            trs.append(_in(state, u - 1, msg, nxt))
            trs.append(_in(state, u - 1, WILDCARD, "bad"))
            state = nxt
        autos.append(Automaton(u, "o0", trs, {state: "ok", "bad": "bad"}))
    langs = {(u, u + 1): framing for u in range(n - 1)}
    return Protocol(autos, langs, [(u, u + 1) for u in range(n - 1)],
                    name="random_pipeline", confluent=True)


GENERATORS = {
    "ping_pong": ping_pong,
    "token_ring": token_ring,
    "broadcast_tree": broadcast_tree,
    "star_race": star_race,
    "random_pipeline": random_pipeline,
}
