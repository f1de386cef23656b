"""Reference executor: the protocol run directly over ideal FIFO channels."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..errors import ParameterError
from .automaton import IN, OUT, Protocol
from .runtime import Step

POLICIES = ("oldest", "newest", "round_robin", "random")


@dataclass
class OracleTranscript:
    outputs: list[str | None]
    walks: list[list[Step]]
    sent: dict[tuple[int, int], list[str]] = field(default_factory=dict)
    delivered: dict[tuple[int, int], list[str]] = field(default_factory=dict)
    truncated: bool = False
    stuck: list[str] = field(default_factory=list)


def oracle_run(protocol: Protocol, policy: str = "oldest", seed: int = 0,
               max_steps: int = 10 ** 6) -> OracleTranscript:
    """Execute one asynchronous run; ``policy`` picks which in-flight
    message is delivered next."""
    if policy not in POLICIES:
        raise ParameterError(f"unknown scheduler policy {policy!r}")
    rng = np.random.default_rng(seed)
    n = protocol.n
    state = [a.initial for a in protocol.automata]
    walks: list[list[Step]] = [[] for _ in range(n)]
    chans: dict[tuple[int, int], deque[tuple[int, str]]] = {}
    tx = OracleTranscript([None] * n, walks)
    clock = 0
    done = [False] * n

    def settle(u: int) -> None:
        nonlocal clock
        a = protocol.automata[u]
        while not done[u]:
            if a.is_terminal(state[u]):
                done[u] = True
                tx.outputs[u] = a.terminal[state[u]]
                return
            tr = a.output_transition(state[u])
            if tr is None:
                return
            clock += 1
            v, msg = tr.action.peer, tr.action.msg
            chans.setdefault((u, v), deque()).append((clock, msg))
            tx.sent.setdefault((u, v), []).append(msg)
            walks[u].append(Step(clock, OUT, v, msg, state[u], tr.dst))
            state[u] = tr.dst

    for u in range(n):
        settle(u)
    rr = 0
    for _ in range(max_steps):
        live = sorted(k for k, q in chans.items() if q and not done[k[1]])
        if not live:
            break
        if policy == "oldest":
            key = min(live, key=lambda k: chans[k][0][0])
        elif policy == "newest":
            key = max(live, key=lambda k: chans[k][-1][0])
        elif policy == "round_robin":
            key = live[rr % len(live)]
            rr += 1
        else:
            key = live[int(rng.integers(len(live)))]
        u, v = key
        _, msg = chans[key].popleft()
        tr = protocol.automata[v].input_transition(state[v], u, msg)
        if tr is None:
            tx.stuck.append(f"node {v} at {state[v]!r} cannot take {msg!r} from {u}")
            continue
        clock += 1
        tx.delivered.setdefault(key, []).append(msg)
        walks[v].append(Step(clock, IN, u, msg, state[v], tr.dst))
        state[v] = tr.dst
        settle(v)
    else:
        tx.truncated = True
    return tx
