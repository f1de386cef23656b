"""Checks a compiled run against the protocol it simulates.

* fifo:     per directed edge, recorded messages are the sent messages in
            order, each recorded exactly once inside its send interval; a
            send may go unrecorded only if the receiver had terminated
* legal:    every node's walk is a path of its automaton and its inputs are
            exactly the messages it applied
* terminal: every node ended in a terminal state and the run was not cut off
* outputs:  for confluent protocols, outputs equal the reference executor's
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..exchange.machines import SendOutcome
from .automaton import IN, OUT, Protocol
from .oracle import oracle_run
from .runtime import RunResult


@dataclass
class Verdict:
    fifo: list[str] = field(default_factory=list)
    legal: list[str] = field(default_factory=list)
    terminal: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.fifo or self.legal or self.terminal or self.outputs)

    def violations(self) -> list[str]:
        return [f"{k}: {m}" for k in ("fifo", "legal", "terminal", "outputs") for m in getattr(self, k)]


def check_fifo(result: RunResult) -> list[str]:
    out = []
    nodes = result.nodes
    for u, tx in enumerate(nodes):
        for v in sorted({s.peer for s in tx.sends}):
            sends = [s for s in tx.sends if s.peer == v]
            recs = [r for r in nodes[v].records if r.peer == u]
            term_round = nodes[v].terminated_round
            j = 0
            for k, s in enumerate(sends):
                if s.returned is None:
                    if j < len(recs):
                        out.append(f"{u}->{v}: send #{k} never returned but has a record")
                    else:
                        out.append(f"{u}->{v}: send #{k} never returned")
                    continue
                rec = recs[j] if j < len(recs) else None
                if rec is not None and rec.msg == s.msg and s.start_round <= rec.round <= s.return_round:
                    j += 1
                    continue
                if s.outcome == SendOutcome.RECEIVER_SILENT.value and term_round is not None \
                        and term_round <= s.return_round:
                    continue
                if rec is not None and rec.msg != s.msg:
                    out.append(f"{u}->{v}: send #{k} {s.msg!r} recorded as {rec.msg!r}")
                    j += 1
                elif rec is not None:
                    out.append(f"{u}->{v}: send #{k} recorded in round {rec.round} outside "
                               f"[{s.start_round}, {s.return_round}]")
                    j += 1
                else:
                    out.append(f"{u}->{v}: send #{k} {s.msg!r} lost ({s.outcome})")
            for rec in recs[j:]:
                out.append(f"{u}->{v}: spurious record {rec.msg!r} in round {rec.round}")
        # records from neighbours that never sent at all
        for rec in tx.records:
            if not any(s.peer == u for s in nodes[rec.peer].sends):
                out.append(f"{rec.peer}->{u}: record {rec.msg!r} without any send")
    return out


def check_legal(result: RunResult, protocol: Protocol) -> list[str]:
    out = []
    for u, tx in enumerate(result.nodes):
        a = protocol.automata[u]
        state = a.initial
        for i, st in enumerate(tx.walk):
            if st.src != state:
                out.append(f"node {u} step {i}: walk jumps from {state!r} to {st.src!r}")
            if st.kind == OUT:
                tr = a.output_transition(st.src)
                ok = tr is not None and (tr.action.peer, tr.action.msg, tr.dst) == (st.peer, st.msg, st.dst)
            else:
                tr = a.input_transition(st.src, st.peer, st.msg)
                ok = tr is not None and tr.dst == st.dst
            if not ok:
                out.append(f"node {u} step {i}: {st.kind}({st.peer},{st.msg}) from {st.src!r} is not a transition")
            state = st.dst
        applied = [(r.peer, r.msg) for r in tx.records if r.applied]
        inputs = [(st.peer, st.msg) for st in tx.walk if st.kind == IN]
        if applied != inputs:
            out.append(f"node {u}: applied inputs differ from recorded messages")
        out += [f"node {u}: {d}" for d in tx.dangling]
    return out


def check_terminal(result: RunResult) -> list[str]:
    out = []
    if result.truncated:
        out.append(f"run truncated: {result.trace.error}")
    for u, tx in enumerate(result.nodes):
        if tx.terminal_state is None:
            out.append(f"node {u} did not terminate")
    return out


def reference_outputs(protocol: Protocol) -> tuple:
    cached = getattr(protocol, "_reference_outputs", None)
    if cached is None:
        cached = tuple(oracle_run(protocol).outputs)
        protocol._reference_outputs = cached
    return cached


def validate(result: RunResult, protocol: Protocol | None = None) -> Verdict:
    protocol = protocol or result.protocol
    v = Verdict(check_fifo(result), check_legal(result, protocol), check_terminal(result))
    if protocol.confluent and not v.terminal:
        want = reference_outputs(protocol)
        got = tuple(tx.output for tx in result.nodes)
        if got != want:
            v.outputs.append(f"outputs {got} differ from reference {want}")
    return v
