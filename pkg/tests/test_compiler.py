import numpy as np
import pytest

from noisysim.adversaries import AdversarySpec, build_adversary
from noisysim.coding.params import round_params
from noisysim.compiler import generators
from noisysim.compiler.automaton import IN, OUT, Action, Automaton, Protocol, Transition
from noisysim.compiler.metrics import (AMD_FAILURE, CONVERSION_TO_SILENCE, FIELDS, KEY_INSTALLATION,
                                       diagnose, measure, path_latencies)
from noisysim.compiler.oracle import POLICIES, oracle_run
from noisysim.compiler.pifile import dump_protocol, load_protocol, parse_protocol
from noisysim.compiler.runtime import recorded_messages, run_protocol
from noisysim.compiler.validate import check_fifo, check_legal, validate
from noisysim.errors import CompileError, ParameterError
from noisysim.exchange.languages import FixedLength

ROOT = __import__("pathlib").Path(__file__).resolve().parents[1]


def one_message(msg="1"):
    """Node 0 sends one message to node 1; both stop."""
    a0 = Automaton(0, "s", [Transition("s", Action(OUT, 1, msg), "done")], {"done": "sent"})
    a1 = Automaton(1, "w", [Transition("w", Action(IN, 0, "*"), "done")], {"done": "got"})
    return Protocol([a0, a1], {(0, 1): FixedLength(len(msg))}, name="one", confluent=True)


# protocol files ------------------------------------------------------------
@pytest.mark.parametrize("make", [generators.ping_pong, lambda: generators.token_ring(4, 2),
                                  lambda: generators.broadcast_tree(5), generators.star_race,
                                  lambda: generators.random_pipeline(3, 60, "uniform:2:5", 4)])
def test_pifile_roundtrip(make):
    p = make()
    text = dump_protocol(p)
    q = parse_protocol(text)
    assert dump_protocol(q) == text
    assert q.confluent == p.confluent and q.edges == p.edges


def test_shipped_protocol_files_load():
    for path in sorted((ROOT / "protocols").glob("*.pi")):
        p = load_protocol(path)
        r = run_protocol(p, 0.1, seed=0)
        assert validate(r).ok


@pytest.mark.parametrize("text,needle", [
    ("nodes 2\nnode 0\n  initial s\n  s --out(1,1)--> t\nend\n", "missing"),
    ("nodes 2\nnode 0\n initial s\n s --foo(1,1)--> t\nend\nnode 1\n initial s\nend\n", "cannot parse"),
    ("nodes 2\nnode 0\n  s --out(1,1)--> t\nend\nnode 1\n initial s\nend\n", "no initial"),
    ("nodes 2\nnode 0\n initial s\n", "missing 'end'"),
    ("nodes 2\nlanguage 0 1 fixed 0\n", "k >= 1"),
])
def test_parse_errors(text, needle):
    with pytest.raises(CompileError, match=needle):
        parse_protocol(text)


def test_nondeterministic_input_rejected():
    with pytest.raises(CompileError):
        Automaton(0, "s", [Transition("s", Action(IN, 1, "1"), "a"),
                           Transition("s", Action(IN, 1, "1"), "b")])


def test_waiting_state_must_accept_every_message():
    a0 = Automaton(0, "s", [Transition("s", Action(OUT, 1, "1"), "d")], {"d": None})
    a1 = Automaton(1, "w", [Transition("w", Action(IN, 0, "1"), "d")], {"d": None})
    p = Protocol([a0, a1], {(0, 1): FixedLength(1)})
    with pytest.raises(CompileError):
        p.validate()


def test_missing_language_rejected():
    a0 = Automaton(0, "s", [Transition("s", Action(OUT, 1, "1"), "d")], {"d": None})
    a1 = Automaton(1, "w", [Transition("w", Action(IN, 0, "*"), "d")], {"d": None})
    with pytest.raises(CompileError):
        Protocol([a0, a1], {}).validate()


def test_generator_errors():
    with pytest.raises(ParameterError):
        generators.random_pipeline(1, 10)
    with pytest.raises(ParameterError):
        generators.parse_lengths("poisson:3")


# oracle --------------------------------------------------------------------
@pytest.mark.parametrize("policy", POLICIES)
def test_oracle_policies_agree_on_confluent_protocols(policy):
    for p in (generators.ping_pong(), generators.token_ring(5, 3), generators.broadcast_tree(6),
              generators.star_race(), generators.random_pipeline(4, 80, "uniform:3:6", 2)):
        tx = oracle_run(p, policy, seed=3)
        assert not tx.truncated and not tx.stuck
        assert tx.outputs == oracle_run(p).outputs
        assert tx.sent == tx.delivered


def test_oracle_star_race_orders():
    orders = set()
    for seed in range(20):
        tx = oracle_run(generators.star_race(), "random", seed)
        orders.add(tuple(st.peer for st in tx.walks[0]))
        assert tx.outputs[0] == "both"
    assert orders == {(1, 2), (2, 1)}


# compiled runs -------------------------------------------------------------
def test_single_message_costs_three_driven_words():
    p = one_message()
    r = run_protocol(p, 0.1, seed=0)
    w1 = round_params(2, 0.1, 1).word_len
    assert r.trace.rounds == 1 and r.trace.steps == 4 * w1
    lane = r.topology.fwd(0, 1)
    # key request and chunk forward, key reply back, silence as acknowledgement
    assert r.trace.driven_bits == {lane: 2 * w1, lane + 1: w1}
    m = measure(r)
    assert m.L == 1 and m.L_prime == 3 * w1 and m.overhead == 3 * w1
    assert m.epsilon == 0 and m.success and m.failure_kind == ""


def test_ping_pong_noise_free():
    p = generators.ping_pong()
    r = run_protocol(p, 0.1, seed=1)
    assert [tx.output for tx in r.nodes] == ["0", "1"]
    assert recorded_messages(r, 0, 1) == ["1"] and recorded_messages(r, 1, 0) == ["0"]
    assert validate(r).ok


def test_sends_to_terminated_node_return_on_silence():
    # node 1 terminates right away; node 0's message must still return
    a0 = Automaton(0, "s", [Transition("s", Action(OUT, 1, "1"), "d")], {"d": "x"})
    a1 = Automaton(1, "d", [Transition("d", Action(IN, 0, "*"), "d")], {"d": "y"})
    p = Protocol([a0, a1], {(0, 1): FixedLength(1)})
    r = run_protocol(p, 0.1, seed=0)
    s = r.nodes[0].sends[0]
    assert s.outcome == "receiver_silent" and s.return_round == 1
    assert r.nodes[1].records == []
    assert validate(r).ok


def test_star_race_applies_simultaneous_records_in_neighbour_order():
    p = generators.star_race()
    r = run_protocol(p, 0.1, seed=0)
    hub = r.nodes[0]
    assert [rec.peer for rec in hub.records] == [1, 2]
    assert len({rec.round for rec in hub.records}) == 1
    assert [st.peer for st in hub.walk] == [1, 2]
    assert validate(r).ok
    # the opposite order is also a legal asynchronous run
    assert any(tuple(st.peer for st in oracle_run(p, "random", s).walks[0]) == (2, 1) for s in range(20))


@pytest.mark.parametrize("make", [lambda: generators.token_ring(4, 2), lambda: generators.broadcast_tree(7),
                                  lambda: generators.random_pipeline(5, 200, "uniform:8:14", 1),
                                  lambda: generators.random_pipeline(3, 40, "fixed:1", 2)])
def test_generated_protocols_match_reference(make):
    p = make()
    r = run_protocol(p, 0.1, seed=5)
    v = validate(r)
    assert v.ok, v.violations()
    assert tuple(tx.output for tx in r.nodes) == tuple(oracle_run(p).outputs)
    for (u, w), lang in p.languages.items():
        assert recorded_messages(r, u, w) == [s.msg for s in r.nodes[u].sends if s.peer == w]


def test_runs_are_reproducible():
    p = generators.random_pipeline(3, 100, "uniform:8:14", 0)
    spec = AdversarySpec("word_corruptor", 2000, 4)

    def once():
        adv = build_adversary(spec)
        r = run_protocol(p, 0.1, seed=9, adversary=adv, budget=2000)
        return r.trace.steps, r.trace.spent, r.events
    assert once() == once()


# validation ----------------------------------------------------------------
def test_validator_flags_tampered_transcripts():
    p = generators.ping_pong()
    r = run_protocol(p, 0.1, seed=0)
    r.nodes[1].records[0].msg = "0"
    v = validate(r)
    assert v.fifo and v.legal and not v.ok

    r = run_protocol(p, 0.1, seed=0)
    r.nodes[1].records.append(r.nodes[1].records[0])
    assert any("spurious" in m for m in check_fifo(r))

    r = run_protocol(p, 0.1, seed=0)
    r.nodes[0].walk[0].dst = "elsewhere"
    assert check_legal(r, p)

    r = run_protocol(p, 0.1, seed=0, max_steps=100)
    v = validate(r)
    assert v.terminal and r.truncated


def test_validator_checks_outputs_of_confluent_protocols():
    p = generators.ping_pong()
    r = run_protocol(p, 0.1, seed=0)
    r.nodes[0].output = "999"
    assert validate(r).outputs


# metrics -------------------------------------------------------------------
def test_metrics_field_order():
    assert FIELDS == ["run_id", "seed", "L", "alpha", "L_prime", "T_budget", "T_spent", "rounds",
                      "latency_steps", "per_path_latency", "success", "failure_kind", "epsilon",
                      "overhead"]


def test_path_latency_follows_causal_chains():
    p = generators.token_ring(3, 1)
    r = run_protocol(p, 0.1, seed=0)
    lat = path_latencies(r)
    assert list(lat) == ["0-1", "0-1-2", "0-1-2-0"]
    assert lat["0-1"] < lat["0-1-2"] < lat["0-1-2-0"]
    first = r.nodes[0].sends[0].enqueued
    last = r.nodes[0].records[-1].time
    assert lat["0-1-2-0"] == last - first + 1


def test_diagnosis_reads_event_log():
    p = one_message()
    r = run_protocol(p, 0.1, seed=0)
    assert diagnose(r) == []
    ev = list(r.events)
    lane = r.topology.fwd(0, 1)
    reply = next(e for e in ev if e[4] == "send" and e[5] == "key_reply")
    # a silence read on a slot somebody drove
    r.events = ev + [(reply[0], "S", lane, 1, "read", "silence", "")]
    assert diagnose(r) == [CONVERSION_TO_SILENCE]
    # an accepted chunk nobody sent
    r.events = ev + [(10 ** 9, "R", lane, 2, "read", "accepted", "3:1:1:0")]
    assert diagnose(r) == [KEY_INSTALLATION]
    # an accepted payload that differs from the sent one
    chunk = next(e for e in ev if e[4] == "send" and e[5] == "chunk")
    fake = (chunk[0], "R", lane, 2, "read", "accepted", chunk[6] + "0")
    r.events = [e for e in ev if not (e[4] == "read" and e[3] == 2)] + [fake]
    assert diagnose(r) == [AMD_FAILURE]
