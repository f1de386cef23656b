"""Seeded experiment runs, sweeps and grids."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

from ..adversaries import AdversarySpec, build_adversary, corruption_cost
from ..coding.params import round_params
from ..compiler import generators
from ..compiler.automaton import Protocol
from ..compiler.metrics import RunMetrics, measure
from ..compiler.pifile import dump_protocol, load_protocol
from ..compiler.runtime import RunResult, run_protocol
from ..compiler.validate import Verdict, validate
from ..errors import ConfigParseError, ParameterError
from ..exchange.schedule import Schedule
from ..netsim import Topology
from .config import ExperimentConfig, auto_alpha
from .fit import Fit, fit_overhead, fit_through_origin

# documented bounds on tau(r) / (r log2(n r / delta)) for 2 <= r <= 10^4
TAU_RATIO_BOUNDS = (300.0, 1800.0)
TAU_GUARD_ROUNDS = 10 ** 4
STEP_CAP_SLACK = 10


@dataclass
class RunRecord:
    metrics: RunMetrics
    verdict: Verdict
    result: RunResult | None = None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    runs: list[RunRecord] = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)

    @property
    def metrics(self) -> list[RunMetrics]:
        return [r.metrics for r in self.runs]


# guards ---------------------------------------------------------------------
@lru_cache(maxsize=64)
def tau_ratio_range(n: int, delta: float, r_max: int = TAU_GUARD_ROUNDS) -> tuple[float, float]:
    """Min and max of tau(r) / (r log2(n r / delta)) over 2 <= r <= r_max."""
    s = Schedule(n, delta)
    ratios = [s.growth_ratio(r) for r in range(2, r_max + 1)]
    return min(ratios), max(ratios)


def check_schedule(n: int, delta: float) -> None:
    lo, hi = tau_ratio_range(n, delta)
    if lo < TAU_RATIO_BOUNDS[0] or hi > TAU_RATIO_BOUNDS[1]:
        raise AssertionError(f"word sizing drifted: tau ratio in [{lo:.1f}, {hi:.1f}], "
                             f"expected within {TAU_RATIO_BOUNDS}")


# construction ---------------------------------------------------------------
def build_protocol(cfg: ExperimentConfig) -> Protocol:
    if cfg.pi_file:
        path = Path(cfg.pi_file)
        if not path.is_absolute() and cfg.source:
            path = Path(cfg.source).parent / path
        p = load_protocol(path)
        if p.n != cfg.n:
            raise ConfigParseError(f"protocol file has {p.n} nodes, config says n={cfg.n}")
        return p
    prm = dict(cfg.pi_params)
    gen = cfg.pi_generator
    seed = int(prm.get("seed", "0"))
    if gen == "random_pipeline":
        L = int(prm.get("L", "100"))
        lengths = prm.get("lengths", "fixed:1")
        if lengths == "fixed:log":
            lengths = f"fixed:{auto_alpha(cfg.n, L, cfg.delta)}"
        return generators.random_pipeline(cfg.n, L, lengths, seed)
    if gen == "token_ring":
        return generators.token_ring(cfg.n, int(prm.get("laps", "1")), prm.get("token", "1"))
    if gen == "broadcast_tree":
        return generators.broadcast_tree(cfg.n, prm.get("value", "101"))
    if gen == "ping_pong":
        if cfg.n != 2:
            raise ConfigParseError("ping_pong needs n = 2")
        return generators.ping_pong(prm.get("ping", "1"), prm.get("pong", "0"))
    if gen == "star_race":
        if cfg.n != 3:
            raise ConfigParseError("star_race needs n = 3")
        return generators.star_race()
    raise ConfigParseError(f"unknown protocol generator {gen!r}")


def build_topology(cfg: ExperimentConfig, protocol: Protocol) -> Topology:
    n = cfg.n
    if cfg.edges is not None:
        edges = cfg.edges
    elif cfg.shape:
        shapes = {
            "path": [(i, i + 1) for i in range(n - 1)],
            "ring": [(i, (i + 1) % n) for i in range(n)],
            "star": [(0, i) for i in range(1, n)],
            "complete": list(itertools.combinations(range(n), 2)),
        }
        if cfg.shape not in shapes:
            raise ConfigParseError(f"unknown topology shape {cfg.shape!r}")
        edges = shapes[cfg.shape]
    else:
        edges = protocol.edges
    topo = Topology(n, edges)
    missing = set(protocol.edges) - set(topo.edges)
    if missing:
        raise ConfigParseError(f"topology lacks protocol edges {sorted(missing)}")
    used = {u for e in protocol.edges for u in e}
    if not topo.connected(used):
        raise ConfigParseError("topology is not connected over the protocol's nodes")
    return topo


_BASELINES: dict[tuple[str, float], tuple[int, int]] = {}


def baseline(protocol: Protocol, delta: float) -> tuple[int, int]:
    """(steps, rounds) of a noise-free run; steps serve as the horizon of
    the uniform random adversary."""
    key = (dump_protocol(protocol), delta)
    if key not in _BASELINES:
        r = run_protocol(protocol, delta, seed=0)
        if r.truncated:
            raise ParameterError("noise-free baseline did not terminate")
        _BASELINES[key] = (r.trace.steps, r.trace.rounds)
    return _BASELINES[key]


def step_cap(protocol: Protocol, delta: float, budget: int) -> int:
    """Generous run-length cap: the noise-free rounds plus one round per
    word the budget could kill, times a slack factor."""
    steps, rounds = baseline(protocol, delta)
    kill = corruption_cost(round_params(protocol.n, delta, 1).ecc_len)
    extra = budget // kill + 1
    s = Schedule(protocol.n, delta)
    return STEP_CAP_SLACK * s.tau(rounds + extra + 1)


# execution ------------------------------------------------------------------
def run_one(cfg: ExperimentConfig, protocol: Protocol, topology: Topology, seed: int,
            keep_result: bool = False) -> RunRecord:
    spec = cfg.adversary
    adv_seed = cfg.adversary_seed if cfg.adversary_seed is not None else seed
    spec = AdversarySpec(spec.kind, spec.budget, adv_seed, spec.params)
    horizon = baseline(protocol, cfg.delta)[0] if spec.kind == "uniform_random" else None
    adv = build_adversary(spec, horizon=horizon, lanes=len(topology.lanes))
    max_steps = cfg.max_steps or step_cap(protocol, cfg.delta, spec.budget)
    result = run_protocol(protocol, cfg.delta, seed=seed, adversary=adv, budget=spec.budget,
                          max_steps=max_steps, keep_traces=cfg.keep_traces, topology=topology)
    verdict = validate(result, protocol)
    m = measure(result, run_id=f"{cfg.name}-s{seed:06d}", verdict=verdict)
    return RunRecord(m, verdict, result if (keep_result or cfg.keep_traces) else None)


def run_experiment(cfg: ExperimentConfig, keep_results: bool = False) -> ExperimentResult:
    if cfg.grid:
        return run_grid(cfg, keep_results)
    check_schedule(cfg.n, cfg.delta)
    protocol = build_protocol(cfg)
    topology = build_topology(cfg, protocol)
    out = ExperimentResult(cfg)
    for seed in cfg.seeds:
        out.runs.append(run_one(cfg, protocol, topology, seed, keep_results))
    out.runs.sort(key=lambda r: r.metrics.run_id)
    out.aggregate = aggregate(cfg, out.metrics, out.runs)
    return out


def run_grid(cfg: ExperimentConfig, keep_results: bool = False) -> ExperimentResult:
    keys = sorted(cfg.grid)
    out = ExperimentResult(cfg)
    cells = []
    for combo in itertools.product(*(cfg.grid[k] for k in keys)):
        sub = replace(cfg, grid={})
        for k, v in zip(keys, combo):
            sub = sub.with_value(k, v)
        res = run_experiment(sub, keep_results)
        out.runs += res.runs
        cells.append(res.aggregate)
    out.runs.sort(key=lambda r: r.metrics.run_id)
    out.aggregate = aggregate(cfg, out.metrics, out.runs)
    out.aggregate["cells"] = sorted(cells, key=lambda c: c["name"])
    return out


def sweep(cfg: ExperimentConfig, vary: str, values: list[str] | None = None,
          keep_results: bool = False) -> ExperimentResult:
    values = values or cfg.sweep.get(vary)
    if not values:
        raise ConfigParseError(f"no [sweep] values for {vary!r}")
    out = ExperimentResult(cfg)
    points = []
    for v in values:
        res = run_experiment(cfg.with_value(vary, v), keep_results)
        out.runs += res.runs
        points.append((v, res))
    out.runs.sort(key=lambda r: r.metrics.run_id)
    out.aggregate = aggregate(cfg, out.metrics, out.runs)
    out.aggregate["sweep"] = {"vary": vary, "points": [
        {"value": v, **{k: r.aggregate[k] for k in ("runs", "success_rate", "mean_L", "mean_alpha",
                                                       "mean_L_prime", "mean_T_spent", "mean_rounds")}}
        for v, r in points]}
    fit = sweep_fit(cfg, vary, points)
    if fit is not None:
        out.aggregate["sweep"]["fit"] = fit.as_dict()
    return out


def sweep_fit(cfg: ExperimentConfig, vary: str, points) -> Fit | None:
    """Fit matching the swept variable; None when it cannot be formed.

    T-sweeps fit the extra cost L'(T) - L'(0) against the budget T.  L- and
    alpha-sweeps fit L' against the cost scale, with the nominal swept
    values deciding whether the sweep spans two decades.
    """
    try:
        if vary == "T":
            zero = dict(points).get("0")
            if zero is None:
                return None
            pos = [(int(v), r) for v, r in points if int(v) > 0]
            return fit_through_origin([t for t, _ in pos],
                                      [r.aggregate["mean_L_prime"] - zero.aggregate["mean_L_prime"]
                                       for _, r in pos])
        xs, ys = [], []
        for v, r in points:
            L, a = r.aggregate["mean_L"], r.aggregate["mean_alpha"]
            xs.append(cost_scale(cfg.n, L, cfg.delta, a) if vary == "L" else L)
            ys.append(r.aggregate["mean_L_prime"])
        if vary == "L":
            return fit_overhead(xs, ys, Ls=[float(v) for v, _ in points])
        return fit_through_origin(xs, ys)
    except ParameterError:
        return None


def cost_scale(n: int, L: float, delta: float, alpha: float) -> float:
    """L log2(nL/delta) for one-bit messages, L (1 + log2(nL/delta)/alpha) otherwise."""
    lg = math.log2(n * L / delta)
    if alpha <= 1:
        return L * lg
    return L * (1 + lg / alpha)


def failure_events(m: RunMetrics) -> list[str]:
    """Diagnosed failure events of a run; truncation is not one."""
    return [k for k in m.failure_kind.split("+") if k and k != "truncated"]


def aggregate(cfg: ExperimentConfig, metrics: list[RunMetrics], runs: list[RunRecord]) -> dict:
    n = len(metrics)
    kinds: dict[str, int] = {}
    for m in metrics:
        for k in filter(None, m.failure_kind.split("+")):
            kinds[k] = kinds.get(k, 0) + 1
    clean = [r for r in runs if not failure_events(r.metrics)]
    fifo_bad = sum(1 for r in clean if r.verdict.fifo)

    def mean(xs):
        xs = [x for x in xs if not (isinstance(x, float) and math.isnan(x))]
        return sum(xs) / len(xs) if xs else 0.0

    return {
        "name": cfg.name,
        "n": cfg.n,
        "delta": cfg.delta,
        "adversary": cfg.adversary.kind,
        "budget": cfg.adversary.budget,
        "runs": n,
        "successes": sum(m.success for m in metrics),
        "success_rate": (sum(m.success for m in metrics) / n) if n else 0.0,
        "truncated": sum(1 for m in metrics if "truncated" in m.failure_kind),
        "failure_events": dict(sorted(kinds.items())),
        "fifo_violations_without_failure_event": fifo_bad,
        "mean_L": mean([m.L for m in metrics]),
        "mean_alpha": mean([m.alpha for m in metrics]),
        "mean_L_prime": mean([m.L_prime for m in metrics]),
        "mean_T_spent": mean([m.T_spent for m in metrics]),
        "mean_rounds": mean([m.rounds for m in metrics]),
        "mean_overhead": mean([m.overhead for m in metrics]),
        "max_epsilon": max((m.epsilon for m in metrics), default=0.0),
    }
