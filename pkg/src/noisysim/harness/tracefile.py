"""Binary per-run trace dumps.

Layout: 4-byte magic ``NSTR``, big-endian u16 format version, then a zlib
compressed UTF-8 JSON document.  Bit histories (when retained) are stored
as base64 of ``numpy.packbits``.
"""
from __future__ import annotations

import base64
import json
import struct
import zlib
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..compiler.pifile import dump_protocol, parse_protocol
from ..compiler.runtime import NodeTranscript, Record, RunResult, SendRecord, Step
from ..exchange.schedule import Schedule
from ..netsim import RunTrace, Topology

MAGIC = b"NSTR"
VERSION = 1
_HEADER = struct.Struct(">4sH")


class TraceFormatError(ValueError):
    pass


def _pack(b: np.ndarray) -> dict:
    return {"n": int(len(b)), "bits": base64.b64encode(np.packbits(b).tobytes()).decode()}


def _unpack(d: dict) -> np.ndarray:
    raw = np.frombuffer(base64.b64decode(d["bits"]), dtype=np.uint8)
    return np.unpackbits(raw)[:d["n"]].astype(np.uint8)


def to_document(result: RunResult) -> dict:
    tr = result.trace
    doc = {
        "protocol": dump_protocol(result.protocol),
        "n": result.schedule.n,
        "delta": result.schedule.delta,
        "seed": result.seed,
        "edges": result.topology.edges,
        "trace": {
            "steps": tr.steps, "rounds": tr.rounds, "truncated": tr.truncated,
            "budget_total": tr.budget_total, "spent": tr.spent, "flips_applied": tr.flips_applied,
            "rejected": len(tr.rejected), "error": tr.error,
            "driven_bits": sorted(tr.driven_bits.items()),
            "driven_slots": sorted(tr.driven_slots),
            "touched": sorted([t, lane, c] for (t, lane), c in tr.touched.items()),
            "flips_per_lane": sorted(tr.flips_per_lane.items()),
        },
        "events": [list(e) for e in result.events],
        "nodes": [asdict(tx) for tx in result.nodes],
    }
    if tr.histories is not None:
        doc["histories"] = {str(lane): [[t, _pack(b), d] for t, b, d in parts]
                            for lane, parts in sorted(tr.histories.items())}
    return doc


def from_document(doc: dict) -> RunResult:
    protocol = parse_protocol(doc["protocol"])
    t = doc["trace"]
    trace = RunTrace(
        steps=t["steps"], rounds=t["rounds"], truncated=t["truncated"],
        budget_total=t["budget_total"], spent=t["spent"], flips_applied=t["flips_applied"],
        driven_bits={int(k): v for k, v in t["driven_bits"]},
        driven_slots={(a, b) for a, b in t["driven_slots"]},
        touched={(a, b): c for a, b, c in t["touched"]},
        flips_per_lane={int(k): v for k, v in t["flips_per_lane"]},
        error=t["error"],
    )
    if "histories" in doc:
        trace.histories = {int(k): [(s, _unpack(b), d) for s, b, d in parts]
                           for k, parts in doc["histories"].items()}
    nodes = []
    for d in doc["nodes"]:
        tx = NodeTranscript(d["node"])
        tx.walk = [Step(**s) for s in d["walk"]]
        tx.sends = [SendRecord(**s) for s in d["sends"]]
        tx.records = [Record(**r) for r in d["records"]]
        for k in ("terminal_state", "output", "terminated_at", "terminated_round", "dangling"):
            setattr(tx, k, d[k])
        nodes.append(tx)
    topology = Topology(doc["n"], [tuple(e) for e in doc["edges"]])
    return RunResult(protocol, trace, nodes, [tuple(e) for e in doc["events"]], topology,
                     Schedule(doc["n"], doc["delta"]), doc["seed"])


def dump_trace(result: RunResult, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = zlib.compress(json.dumps(to_document(result), sort_keys=True).encode(), 6)
    path.write_bytes(_HEADER.pack(MAGIC, VERSION) + body)
    return path


def load_trace(path: str | Path) -> RunResult:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise TraceFormatError("file too short for a trace header")
    magic, version = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise TraceFormatError("not a trace file (bad magic)")
    if version != VERSION:
        raise TraceFormatError(f"unsupported trace version {version}")
    try:
        doc = json.loads(zlib.decompress(raw[_HEADER.size:]))
    except (zlib.error, ValueError) as exc:
        raise TraceFormatError(f"corrupt trace body: {exc}") from None
    return from_document(doc)
