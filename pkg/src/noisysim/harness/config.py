"""Experiment configuration files (INI syntax).

::

    [experiment]
    name = demo
    kind = protocol          # or a codec/schedule check, see checks.py
    n = 4
    delta = 0.1
    seeds = 20               # a count (seeds seed_base .. seed_base+N-1) or a list "3 7 11"
    seed_base = 0
    max_steps = 0            # 0: derived cap
    keep_traces = no

    [topology]               # optional; default: the protocol's own edges
    edges = 0-1 1-2 2-3      # or: shape = path | ring | star | complete

    [pi]
    generator = random_pipeline   # ping_pong | token_ring | broadcast_tree | star_race
    L = 1000
    lengths = uniform:8:14        # fixed:K | uniform:A:B | fixed:log
    seed = 0
    # file = protocols/foo.pi     (instead of generator)

    [adversary]
    kind = word_corruptor
    budget = 1000
    # seed = 5                    (default: the run seed)
    # any other key is passed to the strategy

    [sweep]                  # values for `sweep --vary X`
    L = 16 64 256 1024 4096

    [grid]                   # `run` executes every combination
    n = 2 4 8
    adversary = word_corruptor feedback_jammer
    T = 0 100

    [check]                  # parameters of check-kind experiments
    trials = 1000

Only the output directory can come from the environment (``NOISYSIM_OUT``).
"""
from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..adversaries import KINDS, AdversarySpec
from ..errors import ConfigParseError

OUT_ENV = "NOISYSIM_OUT"
SWEEP_KEYS = ("L", "T", "alpha")
GRID_KEYS = ("n", "delta", "L", "T", "alpha", "adversary")
CHECK_KINDS = ("codec_roundtrip", "amd_detection", "ecc_tolerance", "anti_silence", "schedule_law")


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    kind: str = "protocol"
    n: int = 2
    delta: float = 0.1
    edges: list[tuple[int, int]] | None = None
    shape: str | None = None
    pi_generator: str | None = "random_pipeline"
    pi_file: str | None = None
    pi_params: dict[str, str] = field(default_factory=dict)
    adversary: AdversarySpec = field(default_factory=AdversarySpec)
    adversary_seed: int | None = None
    seeds: list[int] = field(default_factory=lambda: [0])
    max_steps: int | None = None
    keep_traces: bool = False
    sweep: dict[str, list[str]] = field(default_factory=dict)
    grid: dict[str, list[str]] = field(default_factory=dict)
    check: dict[str, str] = field(default_factory=dict)
    source: str | None = None

    def with_value(self, key: str, value: str) -> "ExperimentConfig":
        """Copy with one sweep/grid variable set."""
        pi = dict(self.pi_params)
        adv = self.adversary
        cfg = self
        if key == "L":
            pi["L"] = str(value)
        elif key == "alpha":
            pi["lengths"] = f"fixed:{value}"
        elif key == "T":
            adv = replace(adv, budget=int(value))
        elif key == "adversary":
            adv = replace(adv, kind=str(value))
        elif key == "n":
            cfg = replace(cfg, n=int(value))
        elif key == "delta":
            cfg = replace(cfg, delta=float(value))
        else:
            raise ConfigParseError(f"cannot vary {key!r}")
        return replace(cfg, pi_params=pi, adversary=adv, name=f"{self.name}-{key}{value}")

    def check_valid(self) -> None:
        if self.n < 2:
            raise ConfigParseError(f"n must be >= 2, got {self.n}")
        if not (0.0 < self.delta < 1.0):
            raise ConfigParseError(f"delta must lie in (0, 1), got {self.delta}")
        if self.kind != "protocol" and self.kind not in CHECK_KINDS:
            raise ConfigParseError(f"unknown experiment kind {self.kind!r}")
        if not self.seeds:
            raise ConfigParseError("no seeds")


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "yes", "true", "on"):
        return True
    if t in ("0", "no", "false", "off"):
        return False
    raise ConfigParseError(f"not a boolean: {text!r}")


def _edges(text: str) -> list[tuple[int, int]]:
    out = []
    for tok in text.replace(",", " ").split():
        a, sep, b = tok.partition("-")
        if not sep:
            raise ConfigParseError(f"edge {tok!r} should look like 0-1")
        out.append((int(a), int(b)))
    return out


def parse_config(text: str, source: str | None = None) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str            # keep key case (L, T)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigParseError(f"{source or 'config'}: {exc}") from None
    try:
        return _from_parser(cp, source)
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigParseError):
            raise
        raise ConfigParseError(f"{source or 'config'}: {exc}") from None


def _from_parser(cp: configparser.ConfigParser, source: str | None) -> ExperimentConfig:
    known = {"experiment", "topology", "pi", "adversary", "sweep", "grid", "check"}
    extra = set(cp.sections()) - known
    if extra:
        raise ConfigParseError(f"unknown sections {sorted(extra)}")
    ex = cp["experiment"] if cp.has_section("experiment") else {}
    cfg = ExperimentConfig(source=source)
    cfg.name = ex.get("name", Path(source).stem if source else "experiment")
    cfg.kind = ex.get("kind", "protocol")
    cfg.n = int(ex.get("n", "2"))
    cfg.delta = float(ex.get("delta", "0.1"))
    seeds = ex.get("seeds", "1").split()
    base = int(ex.get("seed_base", "0"))
    cfg.seeds = list(range(base, base + int(seeds[0]))) if len(seeds) == 1 else [int(s) for s in seeds]
    ms = int(ex.get("max_steps", "0"))
    cfg.max_steps = ms or None
    cfg.keep_traces = _bool(ex.get("keep_traces", "no"))

    if cp.has_section("topology"):
        top = cp["topology"]
        if "edges" in top:
            cfg.edges = _edges(top["edges"])
        cfg.shape = top.get("shape")
    if cp.has_section("pi"):
        pi = dict(cp["pi"])
        cfg.pi_file = pi.pop("file", None)
        cfg.pi_generator = None if cfg.pi_file else pi.pop("generator", "random_pipeline")
        cfg.pi_params = pi
    if cp.has_section("adversary"):
        adv = dict(cp["adversary"])
        kind = adv.pop("kind", "none")
        if kind not in KINDS:
            raise ConfigParseError(f"unknown adversary kind {kind!r}")
        budget = int(adv.pop("budget", "0"))
        seed = adv.pop("seed", None)
        cfg.adversary_seed = int(seed) if seed is not None else None
        cfg.adversary = AdversarySpec(kind, budget, cfg.adversary_seed or 0, adv)
    for sec in ("sweep", "grid"):
        if cp.has_section(sec):
            vals = {k: v.split() for k, v in cp[sec].items()}
            allowed = SWEEP_KEYS if sec == "sweep" else GRID_KEYS
            bad = set(vals) - set(allowed)
            if bad:
                raise ConfigParseError(f"[{sec}] cannot vary {sorted(bad)}")
            setattr(cfg, sec, vals)
    if cp.has_section("check"):
        cfg.check = dict(cp["check"])
    cfg.check_valid()
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigParseError(f"cannot read {path}: {exc}") from None
    return parse_config(text, str(path))


def output_dir(default: str | Path = "results") -> Path:
    return Path(os.environ.get(OUT_ENV) or default)


def auto_alpha(n: int, L: int, delta: float) -> int:
    """Message length ceil(log2(n L / delta))."""
    return math.ceil(math.log2(n * L / delta))
