"""Run metrics and after-the-fact failure diagnosis.

Diagnosis uses knowledge the protocol never has (which slots were driven,
what each side actually sent) and is meant for reports and tests only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .runtime import RunResult
from .validate import Verdict, validate

AMD_FAILURE = "amd_failure"
CONVERSION_TO_SILENCE = "conversion_to_silence"
KEY_INSTALLATION = "key_installation"


@dataclass
class RunMetrics:
    run_id: str
    seed: int
    L: int
    alpha: float
    L_prime: int
    T_budget: int
    T_spent: int
    rounds: int
    latency_steps: int
    per_path_latency: dict[str, int]
    success: bool
    failure_kind: str
    epsilon: float
    overhead: float


FIELDS = [f for f in RunMetrics.__dataclass_fields__]


def read_lane(fwd_lane: int, slot: int) -> int:
    """Lane carrying slot ``slot`` of the channel whose forward lane is given
    (slots 0 and 2 travel forward, 1 and 3 back; back lanes are fwd + 1)."""
    return fwd_lane if slot % 2 == 0 else fwd_lane + 1


def diagnose(result: RunResult) -> list[str]:
    """Failure events that occurred in the run, sorted and de-duplicated."""
    sent: dict[tuple[int, int, int], str] = {}
    for t, role, fwd, slot, event, outcome, detail in result.events:
        if event == "send":
            sent[t, fwd, slot] = detail if outcome != "noise" else "noise"
    driven = result.trace.driven_slots
    kinds = set()
    for t, role, fwd, slot, event, outcome, detail in result.events:
        if event != "read":
            continue
        if outcome == "silence":
            if (t, read_lane(fwd, slot)) in driven:
                kinds.add(CONVERSION_TO_SILENCE)
        elif outcome in ("accepted", "rejected_key"):
            original = sent.get((t, fwd, slot))
            if original is None or original == "noise":
                if outcome == "accepted" and slot in (1, 2):
                    kinds.add(KEY_INSTALLATION)
            elif original != detail:
                kinds.add(AMD_FAILURE)
    return sorted(kinds)


def path_latencies(result: RunResult) -> dict[str, int]:
    """Latency of causal message chains, keyed by their node sequence.

    A message's cause is the last message its sender recorded before the
    send was queued.  Each chain runs from the first message's enqueue step
    to the last message's record step; the map keeps the worst chain per
    node sequence.
    """
    records = {}        # (u, v) -> list of record steps in order
    for v, tx in enumerate(result.nodes):
        for r in tx.records:
            records.setdefault((r.peer, v), []).append(r.time)
    msgs = []           # (enqueue, record, u, v)
    for u, tx in enumerate(result.nodes):
        count: dict[int, int] = {}
        for s in tx.sends:
            i = count.get(s.peer, 0)
            count[s.peer] = i + 1
            recs = records.get((u, s.peer), [])
            if i < len(recs):
                msgs.append((s.enqueued, recs[i], u, s.peer))
    msgs.sort()
    start: dict[int, tuple[int, str]] = {}
    by_dst: dict[int, list[int]] = {}
    for idx, (enq, rec, u, v) in enumerate(msgs):
        cause = None
        for j in by_dst.get(u, []):
            if msgs[j][1] <= enq:
                if cause is None or msgs[j][1] >= msgs[cause][1]:
                    cause = j
        if cause is None:
            start[idx] = (enq, f"{u}-{v}")
        else:
            s0, path = start[cause]
            start[idx] = (s0, f"{path}-{v}")
        by_dst.setdefault(v, []).append(idx)
    out: dict[str, int] = {}
    for idx, (enq, rec, u, v) in enumerate(msgs):
        s0, path = start[idx]
        out[path] = max(out.get(path, 0), rec - s0 + 1)
    return dict(sorted(out.items()))


def measure(result: RunResult, run_id: str = "", verdict: Verdict | None = None) -> RunMetrics:
    verdict = verdict or validate(result)
    msgs = [r.msg for tx in result.nodes for r in tx.records]
    L = sum(len(m) for m in msgs)
    tr = result.trace
    L_prime = tr.bits_driven
    kinds = diagnose(result)
    if tr.truncated:
        kinds.append("truncated")
    return RunMetrics(
        run_id=run_id or f"seed{result.seed}",
        seed=result.seed,
        L=L,
        alpha=L / len(msgs) if msgs else 0.0,
        L_prime=L_prime,
        T_budget=tr.budget_total,
        T_spent=tr.spent,
        rounds=tr.rounds,
        latency_steps=tr.steps,
        per_path_latency=path_latencies(result),
        success=verdict.ok,
        failure_kind="+".join(kinds),
        epsilon=tr.spent / L_prime if L_prime else 0.0,
        overhead=L_prime / L if L else math.nan,
    )
