"""Text format for protocols.

::

    # comments start with '#'
    protocol ping_pong
    nodes 2
    edge 0 1                       # optional; inferred from transitions
    confluent yes                  # optional
    language 0 1 fixed 1           # fixed K | gamma | set W1 W2 ...
    language 1 0 set 0 10 11
    node 0
      initial s0
      terminal done = pong         # '= value' is optional
      s0 --out(1,1)--> s1
      s1 --in(1,*)--> done
    end
    node 1
      ...
    end

Every directed edge that carries messages needs a ``language`` line.
"""
from __future__ import annotations

import re
from pathlib import Path

from ..errors import CompileError
from ..exchange.languages import parse_language
from .automaton import Action, Automaton, Protocol, Transition

_TRANSITION = re.compile(r"^(\S+)\s+--(in|out)\((\d+)\s*,\s*([01]+|\*)\)-->\s+(\S+)$")
_TERMINAL = re.compile(r"^terminal\s+(\S+)(?:\s*=\s*(\S+))?$")


def parse_protocol(text: str) -> Protocol:
    name, n, confluent = "pi", None, False
    edges: list[tuple[int, int]] = []
    languages = {}
    automata: dict[int, Automaton] = {}
    node = None
    initial, terminal, transitions = None, {}, []

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        def fail(msg: str):
            raise CompileError(f"line {lineno}: {msg}")

        words = line.split()
        if node is not None:
            if line == "end":
                if initial is None:
                    fail(f"node {node} has no initial state")
                automata[node] = Automaton(node, initial, transitions, terminal)
                node, initial, terminal, transitions = None, None, {}, []
            elif words[0] == "initial" and len(words) == 2:
                initial = words[1]
            elif m := _TERMINAL.match(line):
                terminal[m.group(1)] = m.group(2)
            elif m := _TRANSITION.match(line):
                src, kind, peer, msg, dst = m.groups()
                transitions.append(Transition(src, Action(kind, int(peer), msg), dst))
            else:
                fail(f"cannot parse {line!r} inside a node block")
            continue

        try:
            if words[0] == "protocol" and len(words) == 2:
                name = words[1]
            elif words[0] == "nodes" and len(words) == 2:
                n = int(words[1])
            elif words[0] == "confluent" and len(words) == 2:
                confluent = words[1].lower() in ("yes", "true", "1")
            elif words[0] == "edge" and len(words) == 3:
                edges.append((int(words[1]), int(words[2])))
            elif words[0] == "language" and len(words) >= 4:
                languages[int(words[1]), int(words[2])] = parse_language(" ".join(words[3:]))
            elif words[0] == "node" and len(words) == 2:
                node = int(words[1])
                if node in automata:
                    fail(f"node {node} defined twice")
            else:
                fail(f"cannot parse {line!r}")
        except ValueError as exc:
            if isinstance(exc, CompileError):
                raise
            fail(str(exc))

    if node is not None:
        raise CompileError(f"node {node} block is missing 'end'")
    if n is None:
        n = max(automata) + 1 if automata else 0
    missing = [i for i in range(n) if i not in automata]
    if missing or len(automata) != n:
        raise CompileError(f"automata missing for nodes {missing}")
    proto = Protocol([automata[i] for i in range(n)], languages, edges, name, confluent)
    proto.validate()
    return proto


def load_protocol(path: str | Path) -> Protocol:
    return parse_protocol(Path(path).read_text())


def dump_protocol(p: Protocol) -> str:
    out = [f"protocol {p.name}", f"nodes {p.n}"]
    if p.confluent:
        out.append("confluent yes")
    out += [f"edge {u} {v}" for u, v in p.edges]
    out += [f"language {u} {v} {lang.spec()}" for (u, v), lang in sorted(p.languages.items())]
    for a in p.automata:
        out.append(f"node {a.node}")
        out.append(f"  initial {a.initial}")
        for s, val in sorted(a.terminal.items()):
            out.append(f"  terminal {s}" + (f" = {val}" if val is not None else ""))
        for tr in a.transitions:
            out.append(f"  {tr.src} --{tr.action.kind}({tr.action.peer},{tr.action.msg})--> {tr.dst}")
        out.append("end")
    return "\n".join(out) + "\n"
