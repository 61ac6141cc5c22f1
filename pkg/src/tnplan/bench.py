"""Batch planning pipeline: methods x circuits x partition counts, with reports.

For every circuit the harness plans a serial greedy baseline, then each
partitioned method across a sweep of partition counts, averaging repeated
seeded runs.  Per (circuit, method) the best partition count is the one
with the smallest distributed cost, and its ratio against the serial
baseline's serial cost is the headline number.

Reports are plain dicts serialized with sorted keys.  All wall-clock
measurements live in a separate "timings" section, so the rest of a
report is byte-reproducible for a fixed seed whenever the annealing
budget is given in iterations rather than seconds.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .anneal import AnnealConfig, refine_plan
from .circuits import circuit_to_network
from .costs import CostConfig
from .partition import initial_partition
from .pathfind import GreedyConfig
from .plan import build_plan, serial_plan

METHODS = ("serial-baseline", "partition-only", "sa-naive", "sa-directed")

DEFAULT_SWEEP = (4, 8, 16, 32, 64, 128, 256)


@dataclass
class RunConfig:
    methods: tuple = METHODS
    sweep: tuple = DEFAULT_SWEEP
    epsilon: float = 0.03
    seed: int = 0
    budget_seconds: float = 10.0
    budget_iters: int = 0
    repeats: int = 2
    steps: int = 64
    workers: int = 4
    threads: int = 1
    restart_threshold: int = 20
    t0: float = 1.0
    tf: float = 0.001
    reduction_samples: int = 8
    path_samples: int = 32
    path_noise: float = 0.3
    amplitude: str = ""
    cost: CostConfig = field(default_factory=CostConfig)

    def to_dict(self):
        return {
            "methods": list(self.methods),
            "sweep": list(self.sweep),
            "epsilon": self.epsilon,
            "seed": self.seed,
            "budget_seconds": self.budget_seconds,
            "budget_iters": self.budget_iters,
            "repeats": self.repeats,
            "steps": self.steps,
            "workers": self.workers,
            "restart_threshold": self.restart_threshold,
            "t0": self.t0,
            "tf": self.tf,
            "reduction_samples": self.reduction_samples,
            "path_samples": self.path_samples,
            "path_noise": self.path_noise,
            "amplitude": self.amplitude,
            "cost": {
                "comm_alpha": self.cost.comm_alpha,
                "comm_beta": self.cost.comm_beta,
                "intra_node": self.cost.intra_node,
            },
        }


def derive_seed(master, *key):
    seq = np.random.SeedSequence(master & ((1 << 128) - 1), spawn_key=tuple(key))
    return int(seq.generate_state(1)[0])


def _plan_once(net, method, k, run_seed, budget_seconds, cfg):
    part = initial_partition(net, k, cfg.epsilon, seed=run_seed)
    reduction_cfg = GreedyConfig(
        samples=cfg.path_samples,
        noise_scale=cfg.path_noise,
        rng_seed=derive_seed(run_seed, 1),
    )
    plan = build_plan(net, part, reduction_cfg=reduction_cfg, cost_cfg=cfg.cost)
    if method == "partition-only":
        return plan
    anneal_cfg = AnnealConfig(
        t0=cfg.t0,
        tf=cfg.tf,
        steps=cfg.steps,
        workers=cfg.workers,
        time_limit=budget_seconds if cfg.budget_iters <= 0 else 0.0,
        max_iters=cfg.budget_iters,
        restart_threshold=cfg.restart_threshold,
        mode="directed" if method == "sa-directed" else "naive",
        seed=derive_seed(run_seed, 2),
        cost=cfg.cost,
        reduction_samples=cfg.reduction_samples,
        threads=cfg.threads,
    )
    refined, _ = refine_plan(net, plan, anneal_cfg)
    return refined


def _method_entries(name, net, method, baseline_cost, cfg, ci, timings):
    n = net.num_vertices
    ks = [k for k in cfg.sweep if 2 <= k <= n]
    entries = []
    mi = METHODS.index(method)
    for k in ks:
        per_run_budget = cfg.budget_seconds / max(1, len(ks) * cfg.repeats)
        repeat_costs = []
        repeat_mems = []
        started = time.perf_counter()
        for r in range(cfg.repeats):
            run_seed = derive_seed(cfg.seed, ci, mi, k, r)
            plan = _plan_once(net, method, k, run_seed, per_run_budget, cfg)
            repeat_costs.append(plan.report.con_dist)
            repeat_mems.append(plan.report.mem)
        timings[f"{name}|{method}|k={k}"] = time.perf_counter() - started
        cost = sum(repeat_costs) / len(repeat_costs)
        entries.append(
            {
                "circuit": name,
                "method": method,
                "k": k,
                "cost": cost,
                "mem": sum(repeat_mems) / len(repeat_mems),
                "repeat_costs": repeat_costs,
                "ratio": cost / baseline_cost,
                "best_k": False,
            }
        )
    if entries:
        best = min(entries, key=lambda e: (e["cost"], e["k"]))
        best["best_k"] = True
    return entries


def run_pipeline(named_circuits, cfg=None):
    """Plan every circuit with every configured method; returns the report dict.

    ``named_circuits`` is a list of (name, Circuit).  A circuit that fails
    to ingest or plan contributes an error entry instead of results.
    """
    cfg = cfg or RunConfig()
    results = []
    errors = []
    timings = {}
    for ci, (name, circuit) in enumerate(named_circuits):
        try:
            bits = cfg.amplitude or None
            net = circuit_to_network(circuit, bits=bits)
            started = time.perf_counter()
            baseline = serial_plan(net, cfg.cost)
            timings[f"{name}|serial-baseline"] = time.perf_counter() - started
            baseline_cost = baseline.report.con_serial
            if "serial-baseline" in cfg.methods:
                results.append(
                    {
                        "circuit": name,
                        "method": "serial-baseline",
                        "k": 1,
                        "cost": baseline_cost,
                        "mem": baseline.report.mem,
                        "repeat_costs": [baseline_cost],
                        "ratio": 1.0,
                        "best_k": True,
                    }
                )
            for method in cfg.methods:
                if method == "serial-baseline":
                    continue
                if method not in METHODS:
                    raise ValueError(f"unknown method {method!r}")
                results.extend(
                    _method_entries(name, net, method, baseline_cost, cfg, ci, timings)
                )
        except Exception as exc:
            errors.append({"circuit": name, "error": f"{type(exc).__name__}: {exc}"})
    return {
        "config": cfg.to_dict(),
        "results": results,
        "errors": errors,
        "timings": timings,
    }


def report_json(report):
    return json.dumps(report, sort_keys=True, indent=2)


def _quartiles(values):
    vs = sorted(values)
    n = len(vs)

    def at(q):
        pos = q * (n - 1)
        lo = int(math.floor(pos))
        hi = int(math.ceil(pos))
        if lo == hi:
            return vs[lo]
        w = pos - lo
        return vs[lo] * (1 - w) + vs[hi] * w

    return at(0.0), at(0.25), at(0.5), at(0.75), at(1.0)


def compare_report(reports):
    """Aggregate best-k results per method across one or more report dicts."""
    by_method = {}
    circuits = set()
    for rep in reports:
        for entry in rep.get("results", []):
            circuits.add(entry["circuit"])
            if not entry.get("best_k"):
                continue
            by_method.setdefault(entry["method"], []).append(entry)
    methods = {}
    for method, entries in sorted(by_method.items()):
        ratios = [e["ratio"] for e in entries]
        costs = [e["cost"] for e in entries]
        lo, q1, med, q3, hi = _quartiles(ratios)
        methods[method] = {
            "count": len(entries),
            "ratio_min": lo,
            "ratio_q1": q1,
            "ratio_median": med,
            "ratio_q3": q3,
            "ratio_max": hi,
            "ratio_geomean": math.exp(sum(math.log(r) for r in ratios) / len(ratios)),
            "mean_cost": sum(costs) / len(costs),
        }
    return {"circuits": len(circuits), "methods": methods}


def format_comparison(summary):
    lines = []
    header = (
        f"{'method':<18} {'n':>3} {'min':>9} {'q1':>9} {'median':>9} "
        f"{'q3':>9} {'max':>9} {'geomean':>9} {'mean cost':>12}"
    )
    lines.append(header)
    lines.append("-" * len(header))
    for method, s in summary["methods"].items():
        lines.append(
            f"{method:<18} {s['count']:>3} {s['ratio_min']:>9.3g} {s['ratio_q1']:>9.3g} "
            f"{s['ratio_median']:>9.3g} {s['ratio_q3']:>9.3g} {s['ratio_max']:>9.3g} "
            f"{s['ratio_geomean']:>9.3g} {s['mean_cost']:>12.4g}"
        )
    lines.append(f"circuits: {summary['circuits']}")
    return "\n".join(lines)
