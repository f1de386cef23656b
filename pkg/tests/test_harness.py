import json
import math

import pytest

from noisysim.compiler.metrics import FIELDS
from noisysim.errors import ConfigParseError, ParameterError
from noisysim.harness import cli
from noisysim.harness.checks import anti_silence, flip_pattern, run_check, schedule_law
from noisysim.harness.config import load_config, output_dir, parse_config
from noisysim.harness.experiment import (TAU_RATIO_BOUNDS, build_protocol, build_topology,
                                         cost_scale, run_experiment, sweep, tau_ratio_range)
from noisysim.harness.fit import fit_overhead, fit_through_origin
from noisysim.harness.report import csv_text, emit_report, json_text
from noisysim.harness.tracefile import TraceFormatError, dump_trace, load_trace

ROOT = __import__("pathlib").Path(__file__).resolve().parents[1]

SMALL = """
[experiment]
name = small
n = 2
delta = 0.1
seeds = 3

[pi]
generator = random_pipeline
L = 6
lengths = uniform:2:4

[adversary]
kind = word_corruptor
budget = 200
"""


# config --------------------------------------------------------------------
def test_parse_small_config():
    cfg = parse_config(SMALL)
    assert cfg.name == "small" and cfg.n == 2 and cfg.seeds == [0, 1, 2]
    assert cfg.adversary.kind == "word_corruptor" and cfg.adversary.budget == 200
    assert cfg.pi_params == {"L": "6", "lengths": "uniform:2:4"}


@pytest.mark.parametrize("text", [
    "[experiment]\nn = 1\n",
    "[experiment]\ndelta = 1.5\n",
    "[experiment]\nkind = dance\n",
    "[experiment]\nn = two\n",
    "[bogus]\nx = 1\n",
    "[adversary]\nkind = wizard\n",
    "[sweep]\nn = 2 4\n",
    "[experiment]\nkeep_traces = maybe\n",
    "[topology]\nedges = 0+1\n",
    "not an ini file",
])
def test_bad_configs(text):
    with pytest.raises(ConfigParseError):
        parse_config(text)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigParseError):
        load_config(tmp_path / "nope.ini")


def test_seed_list_and_base():
    assert parse_config("[experiment]\nseeds = 3 7 11\n").seeds == [3, 7, 11]
    assert parse_config("[experiment]\nseeds = 2\nseed_base = 10\n").seeds == [10, 11]


def test_output_dir_env(monkeypatch, tmp_path):
    monkeypatch.delenv("NOISYSIM_OUT", raising=False)
    assert str(output_dir()) == "results"
    monkeypatch.setenv("NOISYSIM_OUT", str(tmp_path))
    assert output_dir() == tmp_path


def test_shipped_configs_parse():
    paths = sorted((ROOT / "configs").glob("*.ini"))
    assert len(paths) >= 11
    for p in paths:
        load_config(p)


def test_topology_checks():
    cfg = parse_config("[experiment]\nn = 3\n[topology]\nedges = 0-1\n[pi]\ngenerator = star_race\n")
    with pytest.raises(ConfigParseError):
        build_topology(cfg, build_protocol(cfg))
    cfg = parse_config("[experiment]\nn = 4\n[topology]\nshape = ring\n[pi]\nL = 5\n")
    topo = build_topology(cfg, build_protocol(cfg))
    assert len(topo.edges) == 4


def test_pi_file_relative_to_config(tmp_path):
    (tmp_path / "c.ini").write_text(f"[experiment]\nn = 2\n[pi]\nfile = {ROOT}/protocols/ping_pong.pi\n")
    p = build_protocol(load_config(tmp_path / "c.ini"))
    assert p.n == 2
    bad = parse_config(f"[experiment]\nn = 3\n[pi]\nfile = {ROOT}/protocols/ping_pong.pi\n")
    with pytest.raises(ConfigParseError):
        build_protocol(bad)


# fits ------------------------------------------------------------------------
def test_fit_exact_line():
    f = fit_through_origin([1, 2, 4], [3, 6, 12])
    assert f.C == pytest.approx(3) and f.residual_ratio == pytest.approx(1)


def test_fit_overhead_needs_span():
    with pytest.raises(ParameterError):
        fit_overhead([1, 2, 3, 4], [1, 2, 3, 4])
    with pytest.raises(ParameterError):
        fit_overhead([10, 20, 30, 40, 50], [1, 2, 3, 4, 5])
    f = fit_overhead([1, 10, 100, 1000, 10000], [2, 20, 200, 2000, 20000])
    assert f.C == pytest.approx(2)


def test_cost_scale():
    assert cost_scale(2, 100, 0.1, 1) == pytest.approx(100 * math.log2(2000))
    assert cost_scale(2, 100, 0.1, 11) == pytest.approx(100 * (1 + math.log2(2000) / 11))


# runs and reports ------------------------------------------------------------
def test_run_is_reproducible_and_csv_byte_stable():
    cfg = parse_config(SMALL)
    a, b = run_experiment(cfg), run_experiment(cfg)
    assert csv_text(a.metrics) == csv_text(b.metrics)
    assert json_text(a.aggregate) == json_text(b.aggregate)
    head = csv_text(a.metrics).splitlines()[0]
    assert head.split(",") == list(FIELDS)
    assert len(csv_text(a.metrics).splitlines()) == 4
    assert a.aggregate["runs"] == 3


def test_csv_sorted_by_run_id():
    res = run_experiment(parse_config(SMALL))
    shuffled = list(reversed(res.metrics))
    assert csv_text(shuffled) == csv_text(res.metrics)


def test_emit_report(tmp_path):
    res = run_experiment(parse_config(SMALL))
    p = emit_report(res.metrics, res.aggregate, "json", tmp_path / "sub" / "r")
    doc = json.loads(p.read_text())
    assert p.suffix == ".json" and doc["name"] == "small"
    p = emit_report(res.metrics, res.aggregate, "csv", tmp_path / "r")
    assert p.read_text() == csv_text(res.metrics)
    with pytest.raises(ValueError):
        emit_report(res.metrics, res.aggregate, "xml", tmp_path / "r")


def test_emit_report_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    res = run_experiment(parse_config(SMALL))
    with pytest.raises(OSError):
        emit_report(res.metrics, res.aggregate, "csv", blocker / "r")


def test_truncated_runs_are_flagged():
    cfg = parse_config(SMALL.replace("seeds = 3", "seeds = 2\nmax_steps = 500"))
    res = run_experiment(cfg)
    assert res.aggregate["truncated"] == 2
    assert all(not m.success and "truncated" in m.failure_kind for m in res.metrics)


def test_grid_and_sweep():
    cfg = parse_config(SMALL + "\n[grid]\nT = 0 50\n[sweep]\nT = 0 100\n")
    g = run_experiment(cfg)
    assert g.aggregate["runs"] == 6 and len(g.aggregate["cells"]) == 2
    s = sweep(cfg, "T")
    assert [p["value"] for p in s.aggregate["sweep"]["points"]] == ["0", "100"]
    with pytest.raises(ConfigParseError):
        sweep(cfg, "alpha")


def test_trace_roundtrip(tmp_path):
    cfg = parse_config(SMALL.replace("seeds = 3", "seeds = 1\nkeep_traces = yes"))
    res = run_experiment(cfg)
    rec = res.runs[0]
    path = dump_trace(rec.result, tmp_path / "t.nstr")
    back = load_trace(path)
    assert back.nodes == rec.result.nodes
    assert back.events == rec.result.events
    assert back.trace.driven_bits == rec.result.trace.driven_bits
    assert set(back.trace.histories) == set(rec.result.trace.histories)


def test_trace_bad_files(tmp_path):
    p = tmp_path / "x.nstr"
    p.write_bytes(b"NS")
    with pytest.raises(TraceFormatError):
        load_trace(p)
    p.write_bytes(b"JUNK\x00\x01rest")
    with pytest.raises(TraceFormatError, match="magic"):
        load_trace(p)
    p.write_bytes(b"NSTR\x00\x09rest")
    with pytest.raises(TraceFormatError, match="version"):
        load_trace(p)
    p.write_bytes(b"NSTR\x00\x01rest")
    with pytest.raises(TraceFormatError, match="corrupt"):
        load_trace(p)


# checks ----------------------------------------------------------------------
def test_flip_patterns_are_distinct_positions():
    import numpy as np
    rng = np.random.default_rng(1)
    for kind in ("burst", "spread", "random"):
        pos = flip_pattern(kind, 400, 133, 8, 5, rng)
        assert len(set(pos.tolist())) == 133 and pos.min() >= 0 and pos.max() < 400
    with pytest.raises(ValueError):
        flip_pattern("zigzag", 10, 2, 8, 0, rng)


def test_small_checks():
    assert anti_silence(b=95, samples=2000)["passed"]
    assert schedule_law(r_max=300)["passed"]
    r = run_check("codec_roundtrip", {"trials": "20", "rounds": "1 4"}, 2, 0.1, 0)
    assert r["passed"] and r["trials"] == 20
    r = run_check("ecc_tolerance", {"sizes": "8", "trials": "5", "patterns": "burst"}, 2, 0.1, 0)
    assert r["passed"]


def test_tau_guard_bounds():
    for n, d in ((2, 0.1), (8, 0.01)):
        lo, hi = tau_ratio_range(n, d, 2000)
        assert TAU_RATIO_BOUNDS[0] <= lo <= hi <= TAU_RATIO_BOUNDS[1]


# cli -------------------------------------------------------------------------
def test_cli_run_and_validate(tmp_path, capsys):
    cfgp = tmp_path / "small.ini"
    cfgp.write_text(SMALL)
    out = tmp_path / "out"
    assert cli.main(["run", str(cfgp), "--seeds", "2", "--seed", "5", "--keep-traces",
                     "--out", str(out)]) == 0
    rows = (out / "small.csv").read_text().splitlines()
    assert len(rows) == 3 and ",5," in rows[1]
    traces = sorted((out / "traces").glob("*.nstr"))
    assert len(traces) == 2
    capsys.readouterr()
    code = cli.main(["validate", str(traces[0])])
    text = capsys.readouterr().out
    assert "verdict:" in text and code in (0, 1)


def test_cli_env_out(tmp_path, monkeypatch):
    cfgp = tmp_path / "small.ini"
    cfgp.write_text(SMALL)
    monkeypatch.setenv("NOISYSIM_OUT", str(tmp_path / "env"))
    assert cli.main(["run", str(cfgp), "--seeds", "1", "--format", "json"]) == 0
    assert json.loads((tmp_path / "env" / "small.json").read_text())["runs"] == 1


def test_cli_check_kind(tmp_path, capsys):
    cfgp = tmp_path / "c.ini"
    cfgp.write_text("[experiment]\nname = sl\nkind = schedule_law\n[check]\nr_max = 200\n")
    assert cli.main(["run", str(cfgp), "--out", str(tmp_path)]) == 0
    assert "sl: PASS" in capsys.readouterr().out
    assert json.loads((tmp_path / "sl.json").read_text())["passed"]


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[experiment]\nn = 1\n")
    assert cli.main(["run", str(bad)]) == 2
    junk = tmp_path / "junk.nstr"
    junk.write_bytes(b"hello")
    assert cli.main(["validate", str(junk)]) == 2
    with pytest.raises(SystemExit):
        cli.main(["sweep", str(bad), "--vary", "n"])


def test_cli_codec_bench(capsys):
    assert cli.main(["codec-bench", "--rounds", "1,3", "--trials", "3"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("round,word_len") and len(lines) == 3
