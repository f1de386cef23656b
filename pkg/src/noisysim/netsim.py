"""Global-clock simulator of directed bit lanes with silent-channel semantics.

Every undirected edge {u, v} carries two bidirectional channels, one for
each endpoint to initiate rounds on, i.e. four directed lanes.  Each lane
carries exactly one bit per time step: the driven bit, or, when nobody
drives it, the lane's held idle value.

Adversary actions per (time, lane):

* ``flip`` on a driven step inverts the delivered bit; on a silent step it
  toggles the held value from that step on.  Cost 1 either way.
* ``set_idle(b)`` on the first step of a contiguous silent run sets the held
  value for free; later in the run it costs 1 if it changes the value.  It
  has no effect on driven steps.

Actions beyond the budget are rejected and logged.  The adversary only ever
sees an :class:`AdversaryView`, which carries public data (clock, schedule,
topology, parameters, the protocol being simulated) and nothing derived from
channel contents or node randomness.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Protocol as TypingProtocol

import numpy as np

from .errors import ConfigurationError
from .exchange.schedule import Schedule

FLIP = "flip"
SET_IDLE = "set_idle"


@dataclass(frozen=True)
class Lane:
    id: int
    src: int
    dst: int
    initiator: int

    @property
    def forward(self) -> bool:
        """True on the initiator-to-responder direction of a channel."""
        return self.src == self.initiator


class Topology:
    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        self.n = n
        norm = sorted({(min(u, v), max(u, v)) for u, v in edges})
        for u, v in norm:
            if u == v or not (0 <= u < n and 0 <= v < n):
                raise ConfigurationError(f"bad edge ({u}, {v}) for n={n}")
        self.edges = norm
        self.lanes: list[Lane] = []
        self._fwd: dict[tuple[int, int], int] = {}
        self._back: dict[tuple[int, int], int] = {}
        for u, v in norm:
            for a, b in ((u, v), (v, u)):
                self._fwd[a, b] = len(self.lanes)
                self.lanes.append(Lane(len(self.lanes), a, b, a))
                self._back[a, b] = len(self.lanes)
                self.lanes.append(Lane(len(self.lanes), b, a, a))
        self._nbrs: dict[int, list[int]] = {i: [] for i in range(n)}
        for u, v in norm:
            self._nbrs[u].append(v)
            self._nbrs[v].append(u)

    def fwd(self, initiator: int, responder: int) -> int:
        """Lane initiator -> responder on the channel ``initiator`` opens."""
        return self._fwd[initiator, responder]

    def back(self, initiator: int, responder: int) -> int:
        """Lane responder -> initiator on the channel ``initiator`` opens."""
        return self._back[initiator, responder]

    def neighbors(self, u: int) -> list[int]:
        return sorted(self._nbrs[u])

    def connected(self, nodes: Iterable[int] | None = None) -> bool:
        nodes = set(range(self.n) if nodes is None else nodes)
        if not nodes:
            return True
        start = next(iter(nodes))
        seen, todo = {start}, [start]
        while todo:
            u = todo.pop()
            for v in self._nbrs[u]:
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        return nodes <= seen

    def public(self) -> tuple[tuple[int, int, int, int], ...]:
        return tuple((ln.id, ln.src, ln.dst, ln.initiator) for ln in self.lanes)


@dataclass(frozen=True)
class AdversaryAction:
    time: int
    lane: int
    action: str = FLIP
    value: int = 0


@dataclass
class FlipBudget:
    total: int
    spent: int = 0

    def charge(self, cost: int = 1) -> bool:
        if self.spent + cost > self.total:
            return False
        self.spent += cost
        return True


@dataclass(frozen=True)
class AdversaryView:
    clock: int
    steps: int
    n: int
    delta: float
    topology: tuple
    round: int
    slot: int
    round_start: int
    slot_start: int
    word_len: int
    pi: Any


class Adversary(TypingProtocol):
    def actions(self, view: AdversaryView) -> Iterable[AdversaryAction]: ...


class NodeHandle(TypingProtocol):
    done: bool

    def drive(self, t: int, k: int) -> dict[int, np.ndarray]: ...
    def listening(self, t: int) -> Iterable[int]: ...
    def listen(self, t: int, k: int, reads: dict[int, np.ndarray]) -> None: ...


@dataclass
class LaneState:
    idle: int = 0
    silent_run: bool = False


@dataclass
class RunTrace:
    steps: int = 0
    rounds: int = 0
    truncated: bool = False
    budget_total: int = 0
    spent: int = 0
    flips_applied: int = 0
    rejected: list[AdversaryAction] = field(default_factory=list)
    driven_bits: dict[int, int] = field(default_factory=dict)
    driven_slots: set[tuple[int, int]] = field(default_factory=set)
    touched: dict[tuple[int, int], int] = field(default_factory=dict)
    flips_per_lane: dict[int, int] = field(default_factory=dict)
    histories: dict[int, list[tuple[int, np.ndarray, bool]]] | None = None
    error: str | None = None

    @property
    def bits_driven(self) -> int:
        return sum(self.driven_bits.values())

    def lane_bits(self, lane: int) -> np.ndarray:
        """Delivered bit history of one lane (needs retained traces)."""
        if self.histories is None:
            raise ValueError("trace retention was off for this run")
        parts = [b for _, b, _ in self.histories.get(lane, [])]
        return np.concatenate(parts) if parts else np.zeros(0, np.uint8)


class Simulator:
    def __init__(self, topology: Topology, schedule: Schedule, adversary: Adversary | None = None,
                 budget: int = 0, keep_traces: bool = False, pi: Any = None):
        self.topology = topology
        self.schedule = schedule
        self.adversary = adversary
        self.budget = FlipBudget(int(budget))
        self.keep_traces = keep_traces
        self.pi = pi
        self.now = 1
        self.lanes = [LaneState() for _ in topology.lanes]
        self.nodes: list[NodeHandle] = []
        self._drivers: dict[int, NodeHandle] = {}
        self._listeners: dict[int, NodeHandle] = {}
        self.trace = RunTrace(budget_total=self.budget.total,
                              histories={} if keep_traces else None)
        self._topo_public = topology.public()
        self._started = False

    # setup ----------------------------------------------------------------
    def attach(self, node: NodeHandle, out_lanes: Iterable[int], in_lanes: Iterable[int]) -> None:
        if self._started:
            raise ConfigurationError("topology is fixed once the simulation starts")
        if any(node is other for other in self.nodes):
            raise ConfigurationError("runtime attached twice")
        for lane in out_lanes:
            if lane in self._drivers:
                raise ConfigurationError(f"lane {lane} already has a driver")
            self._drivers[lane] = node
        for lane in in_lanes:
            if lane in self._listeners:
                raise ConfigurationError(f"lane {lane} already has a listener")
            self._listeners[lane] = node
        self.nodes.append(node)

    # adversary interface --------------------------------------------------
    def adversary_view(self, t: int | None = None, k: int = 1) -> AdversaryView:
        t = self.now if t is None else t
        slot = self.schedule.locate(t)
        return AdversaryView(
            clock=t, steps=k, n=self.schedule.n, delta=self.schedule.delta,
            topology=self._topo_public, round=slot.round, slot=slot.index,
            round_start=slot.round_start, slot_start=slot.start, word_len=slot.word_len,
            pi=self.pi,
        )

    # stepping -------------------------------------------------------------
    def step(self) -> None:
        self.advance(1)

    def advance(self, k: int | None = None) -> int:
        """Advance the clock by ``k`` steps (default: to the next slot
        boundary).  Blocks never straddle a slot boundary."""
        self._started = True
        t0 = self.now
        slot = self.schedule.locate(t0)
        room = slot.start + slot.word_len - t0
        k = room if k is None else min(k, room)
        if k < 1:
            raise ValueError("advance needs k >= 1")

        driven: dict[int, np.ndarray] = {}
        for node in self.nodes:
            for lane, b in node.drive(t0, k).items():
                if self._drivers.get(lane) is not node:
                    raise ConfigurationError(f"node drives lane {lane} it does not own")
                if len(b) != k:
                    raise ValueError("driven block has the wrong length")
                driven[lane] = b
        wanted: set[int] = set()
        for node in self.nodes:
            wanted.update(node.listening(t0))

        acts_by_lane = self._collect_actions(t0, k)
        reads: dict[int, np.ndarray] = {}
        tr = self.trace
        for lane_id in range(len(self.lanes)):
            bits = driven.get(lane_id)
            acts = acts_by_lane.get(lane_id, ())
            need = self.keep_traces or lane_id in wanted
            if bits is None and not acts and not need:
                self.lanes[lane_id].silent_run = True
                continue
            out, applied = self._deliver(lane_id, t0, k, bits, acts, need)
            if bits is not None:
                tr.driven_bits[lane_id] = tr.driven_bits.get(lane_id, 0) + k
                tr.driven_slots.add((slot.start, lane_id))
            if applied:
                key = (slot.start, lane_id)
                tr.touched[key] = tr.touched.get(key, 0) + applied
                tr.flips_per_lane[lane_id] = tr.flips_per_lane.get(lane_id, 0) + applied
                tr.flips_applied += applied
            if out is not None:
                if lane_id in wanted:
                    reads[lane_id] = out
                if self.keep_traces:
                    tr.histories.setdefault(lane_id, []).append((t0, out, bits is not None))

        for node in self.nodes:
            node.listen(t0, k, reads)
        self.now = t0 + k
        tr.steps = self.now - 1
        tr.rounds = slot.round
        tr.spent = self.budget.spent
        return k

    def _collect_actions(self, t0: int, k: int) -> dict[int, list[AdversaryAction]]:
        if self.adversary is None:
            return {}
        view = self.adversary_view(t0, k)
        acts = [a for a in self.adversary.actions(view)]
        if not acts:
            return {}
        nlanes = len(self.lanes)
        ok = []
        for a in acts:
            if not (t0 <= a.time < t0 + k) or not (0 <= a.lane < nlanes) or a.action not in (FLIP, SET_IDLE):
                self.trace.rejected.append(a)
            else:
                ok.append(a)
        ok.sort(key=lambda a: (a.time, a.lane))
        by_lane: dict[int, list[AdversaryAction]] = {}
        for a in ok:
            by_lane.setdefault(a.lane, []).append(a)
        return by_lane

    def _deliver(self, lane_id: int, t0: int, k: int, bits: np.ndarray | None,
                 acts: list[AdversaryAction], need: bool) -> tuple[np.ndarray | None, int]:
        state = self.lanes[lane_id]
        budget = self.budget
        applied = 0
        if bits is not None:
            state.silent_run = False
            pos = []
            for a in acts:
                if a.action != FLIP:
                    continue
                if budget.charge():
                    pos.append(a.time - t0)
                    applied += 1
                else:
                    self.trace.rejected.append(a)
            if not need:
                return None, applied
            if not pos:
                return bits, applied
            out = bits.copy()
            np.bitwise_xor.at(out, np.array(pos), 1)
            return out, applied

        first_free = not state.silent_run
        start = cur = state.idle
        toggles = []
        for a in acts:
            p = a.time - t0
            if a.action == SET_IDLE:
                target = a.value & 1
                if p == 0 and first_free and not toggles:
                    start = cur = target
                elif target != cur:
                    if budget.charge():
                        toggles.append(p)
                        cur = target
                        applied += 1
                    else:
                        self.trace.rejected.append(a)
            else:
                if budget.charge():
                    toggles.append(p)
                    cur ^= 1
                    applied += 1
                else:
                    self.trace.rejected.append(a)
        state.idle = cur
        state.silent_run = True
        if not need:
            return None, applied
        out = np.full(k, start, dtype=np.uint8)
        if toggles:
            tog = np.zeros(k, dtype=np.uint8)
            np.bitwise_xor.at(tog, np.array(toggles), 1)
            out ^= (np.cumsum(tog) & 1).astype(np.uint8)
        return out, applied

    def run(self, until: Callable[["Simulator"], bool] | None = None, max_steps: int = 10 ** 9) -> RunTrace:
        """Step slot by slot until every node is done (or ``until`` holds)."""
        def finished() -> bool:
            if until is not None:
                return until(self)
            return all(node.done for node in self.nodes)

        while not finished():
            if self.now > max_steps:
                self.trace.truncated = True
                self.trace.error = f"max_steps={max_steps} reached"
                break
            slot = self.schedule.locate(self.now)
            k = min(slot.start + slot.word_len - self.now, max_steps + 1 - self.now)
            self.advance(k)
        return self.trace


def bisect_window(times: list[int], t0: int, k: int) -> tuple[int, int]:
    """Index range of sorted ``times`` falling in [t0, t0 + k)."""
    return bisect.bisect_left(times, t0), bisect.bisect_left(times, t0 + k)
