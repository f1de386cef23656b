"""Command line entry point: ``noisysim run|sweep|validate|codec-bench``."""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..coding.params import round_params
from ..coding.word import Kind, Payload, decode_word, encode_word
from ..compiler.metrics import diagnose
from ..compiler.validate import validate
from ..errors import CompileError, ConfigParseError
from .checks import run_check
from .config import ExperimentConfig, load_config, output_dir
from .experiment import ExperimentResult, run_experiment, sweep
from .report import emit_report, json_text
from .tracefile import TraceFormatError, dump_trace, load_trace


def _apply_flags(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.seeds is not None:
        base = args.seed if args.seed is not None else (cfg.seeds[0] if cfg.seeds else 0)
        cfg = replace(cfg, seeds=list(range(base, base + args.seeds)))
    elif args.seed is not None:
        cfg = replace(cfg, seeds=[args.seed])
    if args.max_steps is not None:
        cfg = replace(cfg, max_steps=args.max_steps)
    if args.keep_traces:
        cfg = replace(cfg, keep_traces=True)
    return cfg


def _emit(res: ExperimentResult, args, stem: str) -> None:
    out = Path(args.out) if args.out else output_dir()
    path = emit_report(res.metrics, res.aggregate, args.format, out / stem)
    if res.config.keep_traces:
        for rec in res.runs:
            if rec.result is not None:
                dump_trace(rec.result, out / "traces" / f"{rec.metrics.run_id}.nstr")
    agg = res.aggregate
    print(f"{agg['name']}: {agg['successes']}/{agg['runs']} runs passed validation "
          f"(truncated {agg['truncated']}); report: {path}")
    if "sweep" in agg and "fit" in agg["sweep"]:
        fit = agg["sweep"]["fit"]
        print(f"fit: C = {fit['C']:.4g}, residual ratio = {fit['residual_ratio']:.3f}")


def cmd_run(args) -> int:
    cfg = _apply_flags(load_config(args.config), args)
    if cfg.kind != "protocol":
        result = run_check(cfg.kind, cfg.check, cfg.n, cfg.delta, cfg.seeds[0])
        out = Path(args.out) if args.out else output_dir()
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{cfg.name}.json").write_text(json_text(result))
        print(f"{cfg.name}: {'PASS' if result['passed'] else 'FAIL'} ({cfg.kind})")
        return 0 if result["passed"] else 1
    res = run_experiment(cfg)
    _emit(res, args, cfg.name)
    return 0


def cmd_sweep(args) -> int:
    cfg = _apply_flags(load_config(args.config), args)
    res = sweep(cfg, args.vary)
    _emit(res, args, f"{cfg.name}-sweep-{args.vary}")
    return 0


def cmd_validate(args) -> int:
    try:
        result = load_trace(args.trace)
    except (OSError, TraceFormatError) as exc:
        print(f"cannot load trace: {exc}", file=sys.stderr)
        return 2
    verdict = validate(result)
    events = diagnose(result)
    print(f"verdict: {'pass' if verdict.ok else 'fail'}")
    for v in verdict.violations():
        print(f"  {v}")
    if events:
        print(f"failure events: {', '.join(events)}")
    return 0 if verdict.ok else 1


def cmd_codec_bench(args) -> int:
    rng = np.random.default_rng(args.seed or 0)
    rows = []
    for r in args.rounds:
        p = round_params(args.n, args.delta, r)
        key = rng.integers(0, 2, p.key_len, dtype=np.uint8)
        payload = Payload.chunk(rng.integers(0, 2, p.key_len, dtype=np.uint8), 1, key)
        t0 = time.perf_counter()
        words = [encode_word(payload, p, rng) for _ in range(args.trials)]
        t1 = time.perf_counter()
        ok = sum(decode_word(w, p, Kind.CHUNK) == payload for w in words)
        t2 = time.perf_counter()
        rows.append({"round": r, "word_len": p.word_len, "key_len": p.key_len, "amd_len": p.amd_len,
                     "ecc_len": p.ecc_len, "pad_len": p.pad_len,
                     "encode_us": 1e6 * (t1 - t0) / args.trials,
                     "decode_us": 1e6 * (t2 - t1) / args.trials, "roundtrip_ok": ok})
    if args.format == "json":
        print(json.dumps(rows, indent=2))
    else:
        cols = list(rows[0])
        print(",".join(cols))
        for row in rows:
            print(",".join(f"{row[c]:.1f}" if isinstance(row[c], float) else str(row[c]) for c in cols))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="noisysim", description="Noise-robust protocol simulation experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, help="first (or only) seed")
        p.add_argument("--seeds", type=int, help="number of consecutive seeds")
        p.add_argument("--max-steps", type=int, dest="max_steps")
        p.add_argument("--keep-traces", action="store_true", dest="keep_traces")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="output directory (default: $NOISYSIM_OUT or ./results)")

    p = sub.add_parser("run", help="run one experiment (or a grid / check)")
    p.add_argument("config")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="vary one parameter over the [sweep] values")
    p.add_argument("config")
    p.add_argument("--vary", choices=("L", "T", "alpha"), required=True)
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="re-check a saved run trace")
    p.add_argument("trace")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("codec-bench", help="time word encode/decode")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--rounds", type=lambda s: [int(x) for x in s.split(",")], default=[1, 8, 64, 512])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_codec_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigParseError, CompileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
