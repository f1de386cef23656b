"""Protocol model, compiled node runtime, reference executor and checks."""
from .automaton import Action, Automaton, Protocol, Transition, WILDCARD
from .pifile import dump_protocol, load_protocol, parse_protocol
from .runtime import NodeRuntime, RunResult, compile_protocol, recorded_messages, run_protocol

__all__ = [
    "Action", "Automaton", "Protocol", "Transition", "WILDCARD", "dump_protocol", "load_protocol",
    "parse_protocol", "NodeRuntime", "RunResult", "compile_protocol", "recorded_messages", "run_protocol",
]
