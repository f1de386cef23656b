"""Node runtime of the compiled protocol and the glue that runs it.

Each node walks its automaton.  Output transitions fire immediately and
queue the message on the channel to that neighbour; a queued message starts
being sent at the next round boundary once the channel's previous send has
returned.  Receivers run on every incoming channel each round until the node
terminates; messages they record during a round are applied as input
transitions at the end of that round, in ascending neighbour order.  A
terminated node keeps flushing its queued sends.

Channels the protocol never uses still get a receiver, since a responder
cannot know that nobody will talk to it.  Its language accepts single bits,
so anything recorded there is a spurious message and fails validation.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..bits import bits, to_str
from ..errors import CompileError
from ..exchange.languages import FixedLength
from ..exchange.machines import Receiver, Sender, SendOutcome
from ..exchange.schedule import Schedule
from ..netsim import Adversary, RunTrace, Simulator, Topology
from .automaton import IN, OUT, Protocol


@dataclass
class SendRecord:
    peer: int
    msg: str
    enqueued: int
    started: int | None = None
    returned: int | None = None
    start_round: int | None = None
    return_round: int | None = None
    outcome: str | None = None


@dataclass
class Step:
    time: int
    kind: str           # "in" or "out"
    peer: int
    msg: str
    src: str
    dst: str


@dataclass
class Record:
    time: int
    round: int
    peer: int
    msg: str
    applied: bool = True


@dataclass
class NodeTranscript:
    node: int
    walk: list[Step] = field(default_factory=list)
    sends: list[SendRecord] = field(default_factory=list)
    records: list[Record] = field(default_factory=list)
    terminal_state: str | None = None
    output: str | None = None
    terminated_at: int | None = None
    terminated_round: int | None = None
    dangling: list[str] = field(default_factory=list)


UNUSED_CHANNEL_LANGUAGE = FixedLength(1)


class NodeRuntime:
    """One node of the compiled protocol; plugs into :class:`Simulator`."""

    def __init__(self, node: int, protocol: Protocol, topology: Topology, schedule: Schedule,
                 rng: np.random.Generator):
        self.node = node
        self.automaton = protocol.automata[node]
        self.schedule = schedule
        self.state = self.automaton.initial
        self.tx = NodeTranscript(node)
        self.events: list[tuple] = []       # (slot_start, lane, role, slot, event, outcome, detail)
        self.neighbors = topology.neighbors(node)
        self.senders: dict[int, Sender] = {}
        self.receivers: dict[int, Receiver] = {}
        self.queues: dict[int, deque[SendRecord]] = {}
        self.active: dict[int, SendRecord] = {}
        # (machine, lane it drives, lane it reads, neighbour, is_sender)
        self._roles: list[tuple[Any, int, int, int, bool]] = []
        self._slot_start = 1
        for v in self.neighbors:
            s = Sender(rng, self._probe_for(topology.fwd(node, v), "S"))
            self.senders[v] = s
            self.queues[v] = deque()
            self._roles.append((s, topology.fwd(node, v), topology.back(node, v), v, True))
            lang = protocol.languages.get((v, node), UNUSED_CHANNEL_LANGUAGE)
            r = Receiver(lang, rng, self._probe_for(topology.fwd(v, node), "R"))
            self.receivers[v] = r
            self._roles.append((r, topology.back(v, node), topology.fwd(v, node), v, False))
        self.out_lanes = [drive for _, drive, _, _, _ in self._roles]
        self.in_lanes = [read for _, _, read, _, _ in self._roles]
        self._words: dict[int, np.ndarray] = {}
        self._listen: dict[int, Any] = {}
        self._buf: dict[int, list[np.ndarray]] = {}
        self._pending: list[Record] = []
        self.terminal = False
        self._run_outputs(1)

    def _probe_for(self, fwd_lane: int, role: str):
        def probe(slot: int, event: str, outcome: str, detail: str) -> None:
            self.events.append((self._slot_start, role, fwd_lane, slot, event, outcome, detail))
        return probe

    # automaton walk -------------------------------------------------------
    def _run_outputs(self, t: int) -> None:
        a = self.automaton
        while not self.terminal:
            if a.is_terminal(self.state):
                self.terminal = True
                self.tx.terminal_state = self.state
                self.tx.output = a.terminal[self.state]
                self.tx.terminated_at = t
                self.tx.terminated_round = self.schedule.round_of(t)
                break
            tr = a.output_transition(self.state)
            if tr is None:
                break
            peer, msg = tr.action.peer, tr.action.msg
            if peer not in self.senders:
                raise CompileError(f"node {self.node}: no channel to {peer}")
            rec = SendRecord(peer, msg, t)
            self.queues[peer].append(rec)
            self.tx.sends.append(rec)
            self.tx.walk.append(Step(t, OUT, peer, msg, self.state, tr.dst))
            self.state = tr.dst

    def _apply_records(self, t: int) -> None:
        for rec in sorted(self._pending, key=lambda r: r.peer):
            self.tx.records.append(rec)
            if self.terminal or self.automaton.is_terminal(self.state):
                rec.applied = False
                continue
            tr = self.automaton.input_transition(self.state, rec.peer, rec.msg)
            if tr is None:
                rec.applied = False
                self.tx.dangling.append(f"{self.state}: no input for {rec.msg!r} from {rec.peer}")
                continue
            self.tx.walk.append(Step(t, IN, rec.peer, rec.msg, self.state, tr.dst))
            self.state = tr.dst
            if self.automaton.is_terminal(self.state):
                self._run_outputs(t)
        self._pending = []
        self._run_outputs(t)

    # simulator interface --------------------------------------------------
    @property
    def done(self) -> bool:
        return self.terminal and not self.active and not any(self.queues.values())

    def drive(self, t: int, k: int) -> dict[int, np.ndarray]:
        slot = self.schedule.locate(t)
        if t == slot.start:
            self._begin_slot(slot)
        off = t - slot.start
        if off == 0 and k == slot.word_len:
            return dict(self._words)
        return {lane: w[off:off + k] for lane, w in self._words.items()}

    def _begin_slot(self, slot) -> None:
        self._slot_start = slot.start
        params = self.schedule.params(slot.round)
        if slot.index == 0:
            for v, s in self.senders.items():
                if not s.busy and self.queues[v]:
                    rec = self.queues[v].popleft()
                    rec.started, rec.start_round = slot.start, slot.round
                    self.active[v] = rec
                    s.start(bits(rec.msg))
        self._words = {}
        self._listen = {}
        for machine, drive_lane, read_lane, v, is_sender in self._roles:
            if not is_sender and self.terminal:
                continue
            w = machine.begin_slot(slot.index, params)
            if w is not None:
                self._words[drive_lane] = w
            if machine.listens(slot.index):
                self._listen[read_lane] = (machine, v, is_sender)
        self._buf = {lane: [] for lane in self._listen}

    def listening(self, t: int):
        return self._listen.keys()

    def listen(self, t: int, k: int, reads: dict[int, np.ndarray]) -> None:
        for lane, buf in self._buf.items():
            buf.append(reads[lane])
        slot = self.schedule.locate(t)
        if t + k == slot.end:
            self._end_slot(slot)

    def _end_slot(self, slot) -> None:
        params = self.schedule.params(slot.round)
        end = slot.end
        for lane, (machine, v, is_sender) in self._listen.items():
            buf = self._buf[lane]
            read = buf[0] if len(buf) == 1 else np.concatenate(buf)
            out = machine.end_slot(slot.index, params, read)
            if out is None:
                continue
            if is_sender:
                rec = self.active.pop(v)
                rec.returned, rec.return_round, rec.outcome = end - 1, slot.round, out.value
            else:
                self._pending.append(Record(end - 1, slot.round, v, out))
        # senders not reading slot 3 still close their round
        if slot.index == 3:
            heard = {v for m, v, isn in self._listen.values() if isn}
            for v, s in self.senders.items():
                if v in self.active and v not in heard:
                    out = s.end_slot(3, params, None)
                    if out is not None:
                        rec = self.active.pop(v)
                        rec.returned, rec.return_round, rec.outcome = end - 1, slot.round, out.value
            self._apply_records(end)
        self._listen = {}
        self._buf = {}


@dataclass
class RunResult:
    protocol: Protocol
    trace: RunTrace
    nodes: list[NodeTranscript]
    events: list[tuple]                 # (slot_start, role, fwd_lane, slot, event, outcome, detail)
    topology: Topology
    schedule: Schedule
    seed: int

    @property
    def truncated(self) -> bool:
        return self.trace.truncated


def compile_protocol(protocol: Protocol, delta: float, seed: int = 0,
                     topology: Topology | None = None) -> tuple[list[NodeRuntime], Topology, Schedule]:
    protocol.validate()
    topology = topology or Topology(protocol.n, protocol.edges)
    schedule = Schedule(protocol.n, delta)
    streams = np.random.SeedSequence([seed, 0x6E6F6465]).spawn(protocol.n)
    runtimes = [NodeRuntime(u, protocol, topology, schedule, np.random.default_rng(streams[u]))
                for u in range(protocol.n)]
    return runtimes, topology, schedule


def run_protocol(protocol: Protocol, delta: float, seed: int = 0, adversary: Adversary | None = None,
                 budget: int = 0, max_steps: int = 10 ** 10, keep_traces: bool = False,
                 topology: Topology | None = None) -> RunResult:
    runtimes, topology, schedule = compile_protocol(protocol, delta, seed, topology)
    sim = Simulator(topology, schedule, adversary, budget, keep_traces, pi=protocol)
    for rt in runtimes:
        sim.attach(rt, rt.out_lanes, rt.in_lanes)
    trace = sim.run(max_steps=max_steps)
    events = sorted((e for rt in runtimes for e in rt.events), key=lambda e: (e[0], e[3], e[2], e[1]))
    return RunResult(protocol, trace, [rt.tx for rt in runtimes], events, topology, schedule, seed)


def recorded_messages(result: RunResult, sender: int, receiver: int) -> list[str]:
    return [r.msg for r in result.nodes[receiver].records if r.peer == sender]


__all__ = ["NodeRuntime", "RunResult", "compile_protocol", "run_protocol", "recorded_messages", "to_str"]
