"""I/O automata describing the asynchronous protocol being simulated.

Messages are '0'/'1' strings.  An input action may use the wildcard message
``*`` to match anything from that neighbour that no exact transition
matches; this is how infinite languages are made input-enabled.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from ..errors import CompileError
from ..exchange.languages import Completion, FiniteSet, PrefixFreeLanguage

WILDCARD = "*"
IN, OUT = "in", "out"


@dataclass(frozen=True)
class Action:
    kind: str           # "in" or "out"
    peer: int
    msg: str

    def __str__(self) -> str:
        return f"{self.kind}({self.peer},{self.msg})"


@dataclass(frozen=True)
class Transition:
    src: str
    action: Action
    dst: str


class Automaton:
    def __init__(self, node: int, initial: str, transitions: Iterable[Transition],
                 terminal: dict[str, str | None] | None = None, states: Iterable[str] = ()):
        self.node = node
        self.initial = initial
        self.transitions = list(transitions)
        self.terminal = dict(terminal or {})
        self.states = {initial, *states, *self.terminal}
        for tr in self.transitions:
            self.states.update((tr.src, tr.dst))
        self._out: dict[str, list[Transition]] = {}
        self._in: dict[tuple[str, int, str], Transition] = {}
        for tr in self.transitions:
            if tr.action.kind == OUT:
                self._out.setdefault(tr.src, []).append(tr)
            else:
                key = (tr.src, tr.action.peer, tr.action.msg)
                if key in self._in and self._in[key].dst != tr.dst:
                    raise CompileError(f"node {node}: nondeterministic input at {tr.src} on {tr.action}")
                self._in[key] = tr
        for trs in self._out.values():
            trs.sort(key=lambda tr: tr.action.peer)     # stable: file order within a peer

    def is_terminal(self, state: str) -> bool:
        return state in self.terminal

    def output_transition(self, state: str) -> Transition | None:
        trs = self._out.get(state)
        return trs[0] if trs else None

    def input_transition(self, state: str, peer: int, msg: str) -> Transition | None:
        return self._in.get((state, peer, msg)) or self._in.get((state, peer, WILDCARD))

    def senders(self) -> set[int]:
        return {tr.action.peer for tr in self.transitions if tr.action.kind == IN}

    def targets(self) -> set[int]:
        return {tr.action.peer for tr in self.transitions if tr.action.kind == OUT}


@dataclass
class Protocol:
    """One automaton per node plus the language of every directed edge."""
    automata: list[Automaton]
    languages: dict[tuple[int, int], PrefixFreeLanguage]
    edges: list[tuple[int, int]] = field(default_factory=list)
    name: str = "pi"
    confluent: bool = False

    def __post_init__(self):
        if not self.edges:
            es = set()
            for a in self.automata:
                for v in a.targets() | a.senders():
                    es.add((min(a.node, v), max(a.node, v)))
            self.edges = sorted(es)
        else:
            self.edges = sorted({(min(u, v), max(u, v)) for u, v in self.edges})

    @property
    def n(self) -> int:
        return len(self.automata)

    def language(self, sender: int, receiver: int) -> PrefixFreeLanguage:
        try:
            return self.languages[sender, receiver]
        except KeyError:
            raise CompileError(f"no language declared for edge {sender}->{receiver}") from None

    def neighbors(self, u: int) -> list[int]:
        return sorted({b if a == u else a for a, b in self.edges if u in (a, b)})

    def validate(self) -> None:
        """Raise CompileError unless every automaton is well formed."""
        if self.n < 2:
            raise CompileError("a protocol needs at least two nodes")
        for i, a in enumerate(self.automata):
            if a.node != i:
                raise CompileError(f"automaton {i} is labelled node {a.node}")
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n) or u == v:
                raise CompileError(f"bad edge ({u}, {v})")
        for a in self.automata:
            self._validate_one(a)

    def _validate_one(self, a: Automaton) -> None:
        u = a.node
        nbrs = set(self.neighbors(u))
        if a.initial not in a.states:
            raise CompileError(f"node {u}: unknown initial state")
        for tr in a.transitions:
            peer = tr.action.peer
            if peer not in nbrs:
                raise CompileError(f"node {u}: {tr.action} names a non-neighbour")
            if tr.action.kind not in (IN, OUT):
                raise CompileError(f"node {u}: unknown action kind {tr.action.kind!r}")
            if tr.action.kind == OUT:
                if tr.action.msg == WILDCARD:
                    raise CompileError(f"node {u}: output actions need a concrete message")
                lang = self.language(u, peer)
                if lang.is_complete(tr.action.msg) is not Completion.COMPLETE:
                    raise CompileError(f"node {u}: {tr.action.msg!r} is not in the language of {u}->{peer}")
            elif tr.action.msg != WILDCARD:
                lang = self.language(peer, u)
                if lang.is_complete(tr.action.msg) is not Completion.COMPLETE:
                    raise CompileError(f"node {u}: {tr.action.msg!r} is not in the language of {peer}->{u}")
        # input-enabledness on every state where the node waits for messages
        talkers = [v for v in sorted(nbrs) if u in self.automata[v].targets()]
        for s in sorted(a.states):
            if a.is_terminal(s) or a.output_transition(s) is not None:
                continue
            for v in talkers:
                if (s, v, WILDCARD) in a._in:
                    continue
                lang = self.language(v, u)
                if not isinstance(lang, FiniteSet) or any((s, v, w) not in a._in for w in lang.words):
                    raise CompileError(f"node {u}: state {s!r} is not input-enabled for messages from {v}")
