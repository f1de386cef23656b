import math

import numpy as np
import pytest

from noisysim.adversaries import (KINDS, AdversarySpec, FeedbackJammer, KeyGuesser, SilenceForger,
                                  UniformRandom, WordCorruptor, build_adversary, corruption_cost,
                                  quiet_channels, talking_channels)
from noisysim.bits import to_int
from noisysim.coding.params import round_params
from noisysim.coding.word import Kind, Payload, encode_word, is_silence, noise_word
from noisysim.compiler import generators
from noisysim.compiler.metrics import CONVERSION_TO_SILENCE, diagnose
from noisysim.compiler.runtime import recorded_messages, run_protocol
from noisysim.compiler.validate import validate
from noisysim.errors import ConfigurationError
from noisysim.exchange import FixedLength, Receiver, Schedule
from noisysim.netsim import Topology

PIPE = generators.random_pipeline(3, 60, "uniform:8:14", 0)


def run(protocol, kind, budget, seed=0, **params):
    spec = AdversarySpec(kind, budget, seed, params)
    base = run_protocol(protocol, 0.1, seed=seed)
    adv = build_adversary(spec, horizon=base.trace.steps, lanes=len(base.topology.lanes))
    return run_protocol(protocol, 0.1, seed=seed, adversary=adv, budget=budget), base, adv


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        AdversarySpec("telepath", 1)
    with pytest.raises(ConfigurationError):
        AdversarySpec("burst", -1)
    with pytest.raises(ConfigurationError):
        build_adversary(AdversarySpec("uniform_random", 5))


@pytest.mark.parametrize("kind", KINDS)
def test_zero_budget_changes_nothing(kind):
    r, base, _ = run(PIPE, kind, 0)
    assert r.events == base.events and r.trace.steps == base.trace.steps
    assert r.trace.spent == 0


def test_uniform_random_spends_exactly_its_budget():
    r, base, _ = run(PIPE, "uniform_random", 300)
    assert r.trace.spent == r.trace.flips_applied == 300
    adv = UniformRandom(10 ** 6, 0, horizon=50, lanes=4)
    assert len(adv.times) == 200            # min(T, steps x lanes)
    assert len(set(zip(adv.times, adv.lanes))) == 200


@pytest.mark.parametrize("kind", ["burst", "word_corruptor", "feedback_jammer", "silence_forger",
                                  "key_guesser"])
def test_strategies_are_reproducible_and_within_budget(kind):
    a, _, _ = run(PIPE, kind, 3000, seed=4)
    b, _, _ = run(PIPE, kind, 3000, seed=4)
    assert a.events == b.events and a.trace.touched == b.trace.touched
    assert a.trace.spent <= 3000


def test_channel_helpers():
    p = generators.random_pipeline(3, 10, "fixed:1", 0)
    topo = Topology(3, p.edges)
    view = type("V", (), {"topology": topo.public(), "pi": p})()
    assert talking_channels(view) == [(topo.fwd(0, 1), topo.back(0, 1)), (topo.fwd(1, 2), topo.back(1, 2))]
    assert quiet_channels(view) == [(topo.fwd(1, 0), topo.back(1, 0)), (topo.fwd(2, 1), topo.back(2, 1))]


# word corruptor --------------------------------------------------------------
def test_one_killed_chunk_costs_one_extra_round():
    p = generators.random_pipeline(2, 1, "fixed:1", 0)
    r, base, _ = run(p, "word_corruptor", 10 ** 4, rounds="1")
    ecc1 = round_params(2, 0.1, 1).ecc_len
    assert r.trace.spent == corruption_cost(ecc1)
    assert r.trace.rounds == base.trace.rounds + 1
    assert validate(r).ok


def test_budget_below_threshold_kills_nothing():
    ecc1 = round_params(2, 0.1, 1).ecc_len
    r, base, _ = run(PIPE, "word_corruptor", corruption_cost(ecc1) - 1)
    assert r.trace.rounds == base.trace.rounds and r.trace.spent == 0
    b, base, _ = run(PIPE, "burst", ecc1 // 3, length=ecc1 // 3)
    assert b.trace.rounds == base.trace.rounds and b.trace.spent > 0


def test_killed_rounds_cost_a_third_of_the_ecc_region_each():
    r, base, _ = run(PIPE, "word_corruptor", 20_000, seed=2)
    extra = r.trace.rounds - base.trace.rounds
    assert extra >= 1
    floor = min(round_params(3, 0.1, k).ecc_len for k in range(1, r.trace.rounds + 1)) / 3
    assert r.trace.spent >= extra * floor
    assert validate(r).ok


# feedback jammer -------------------------------------------------------------
def _jam_once(slot):
    p = generators.random_pipeline(2, 2, "fixed:1", 0)     # two one-bit messages 0 -> 1
    adv = FeedbackJammer(10 ** 5, 0, rounds={1})
    adv.rng = np.random.default_rng(0)
    orig = adv.plan

    def plan(view):
        if view.slot == 0 and view.round == 1:
            adv._target = {fwd: slot for fwd, _ in talking_channels(view)}
            return []
        return orig(view) if view.slot != 0 else []
    adv.plan = plan
    return run_protocol(p, 0.1, seed=0, adversary=adv, budget=10 ** 5), p


def test_jammed_key_reply_keeps_sender_silent():
    r, p = _jam_once(1)
    t1 = r.schedule.tau(1)
    first = [e for e in r.events if e[0] < r.schedule.tau(2) and e[1] == "S" and e[2] == r.topology.fwd(0, 1)]
    assert [(e[3], e[4], e[5]) for e in first] == [(0, "send", "key_request"), (1, "read", "invalid")]
    assert (t1 + 2 * r.schedule.word_len(1), r.topology.fwd(0, 1)) not in r.trace.driven_slots
    assert validate(r).ok and recorded_messages(r, 0, 1) == [s.msg for s in r.nodes[0].sends]


def test_jammed_ack_causes_deduplicated_resend():
    r, p = _jam_once(3)
    lane = r.topology.fwd(0, 1)
    chunks = [e for e in r.events if e[1] == "S" and e[2] == lane and e[4] == "send" and e[5] == "chunk"]
    assert len(chunks) == 3 and chunks[0][6].split(":")[:3] == chunks[1][6].split(":")[:3]
    dup = [e for e in r.events if e[0] == chunks[1][0] and e[1] == "R" and e[4] == "record"]
    assert dup == []
    assert recorded_messages(r, 0, 1) == [s.msg for s in r.nodes[0].sends]
    assert validate(r).ok


# silence forger --------------------------------------------------------------
@pytest.mark.parametrize("b,samples", [(95, 100_000), (228, 20_000)])
def test_fixed_masks_rarely_silence_noise(b, samples):
    rng = np.random.default_rng(b)
    forger = SilenceForger(10 ** 9, 0)
    mask = forger.mask_bits(b)
    x = rng.integers(0, 2, size=(samples, b), dtype=np.uint8) ^ mask
    rate = np.mean(3 * np.count_nonzero(x[:, 1:] != x[:, :-1], axis=1) < b)
    p = math.exp(-b / 19)
    assert rate <= p + 3 * math.sqrt(p * (1 - p) / samples)


def test_silence_forger_in_runs():
    r, base, adv = run(PIPE, "silence_forger", 40_000, seed=1)
    assert adv.attempts > 0
    assert CONVERSION_TO_SILENCE not in diagnose(r)
    assert validate(r).ok


# key guesser -----------------------------------------------------------------
def test_forged_key_request_gets_a_reply():
    r, base, adv = run(PIPE, "key_guesser", 50_000, seed=3)
    assert adv.forged_requests > 0 and adv.injections > 0
    quiet = {r.topology.fwd(1, 0), r.topology.fwd(2, 1)}
    replies = [e for e in r.events if e[1] == "R" and e[2] in quiet and e[4] == "send"]
    assert any(e[5] == "key_reply" for e in replies)
    assert any(e[5] == "noise" for e in replies)
    assert validate(r).ok and diagnose(r) == []


def test_injected_chunk_acceptance_is_about_two_to_minus_kappa():
    rng = np.random.default_rng(0)
    p = round_params(2, 0.1, 1)
    k = p.key_len
    words = {}
    req = encode_word(Payload.key_request(np.zeros(k, np.uint8)), p, rng)
    recv = Receiver(FixedLength(1), rng)
    trials, hits = 100_000, 0
    for _ in range(trials):
        recv.begin_slot(0, p)
        recv.end_slot(0, p, req)
        recv.begin_slot(1, p)
        guess = int(rng.integers(1 << k))
        if guess not in words:
            key = np.array([(guess >> (k - 1 - i)) & 1 for i in range(k)], np.uint8)
            words[guess] = encode_word(Payload.chunk(np.ones(1, np.uint8), 0, key), p, rng)
        recv.parity = 1
        recv.partial = ""
        hits += recv.end_slot(2, p, words[guess]) is not None
    expect = trials / 2 ** k
    assert abs(hits - expect) <= 4 * math.sqrt(expect) + 1
