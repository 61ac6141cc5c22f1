"""Command line front-end.

Subcommands:

* ``ingest``   circuit JSON -> tensor network JSON
* ``plan``     network JSON -> partitioned contraction plan JSON
* ``anneal``   refine a plan (or build one first) with simulated annealing
* ``execute``  run a plan on the dense executor, optionally emulating
  distributed execution
* ``bench``    batch pipeline over a circuit suite, writes a report
* ``report``   summarize one or more bench reports as a table

Exit codes: 0 on success, 1 on error, 2 when a bench batch partially
failed (some circuits produced results, some errored).
"""

from __future__ import annotations

import argparse
import json
import sys

from .anneal import AnnealConfig, refine_plan
from .bench import METHODS, RunConfig, compare_report, format_comparison, report_json, run_pipeline
from .circuits import circuit_from_dict, circuit_to_network
from .corpus import bundled_suite
from .costs import CostConfig, cost_report
from .execute import DEFAULT_MAX_ENTRIES, execute_distributed_emulation, execute_plan
from .network import TensorNetwork
from .partition import initial_partition
from .pathfind import GreedyConfig, random_greedy_tree
from .plan import build_plan, plan_from_dict, plan_to_dict, serial_plan


def _read_json(path):
    if path == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def _write_text(text, path):
    if path is None or path == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _load_network(path, amplitude=None, initial=None):
    """Load a network JSON file; circuit JSON is ingested on the fly."""
    payload = _read_json(path)
    if isinstance(payload, dict) and "gates" in payload:
        circuit = circuit_from_dict(payload)
        return circuit_to_network(circuit, bits=amplitude or None, initial=initial or None)
    return TensorNetwork.from_json(payload)


def _cost_config(args):
    return CostConfig(
        comm_alpha=getattr(args, "comm_alpha", 0.0),
        comm_beta=getattr(args, "comm_beta", 0.0),
        intra_node=getattr(args, "intra_node", "serial"),
    )


def _add_cost_flags(parser):
    parser.add_argument(
        "--cost-metric",
        choices=("serial", "par", "dist"),
        default="dist",
        help="metric reported as the headline cost (and optimized by anneal)",
    )
    parser.add_argument(
        "--intra-node",
        choices=("serial", "par"),
        default="serial",
        help="how work inside one partition is costed",
    )
    parser.add_argument("--comm-alpha", type=float, default=0.0, help="per-message cost")
    parser.add_argument("--comm-beta", type=float, default=0.0, help="per-entry transfer cost")


def _metric_value(report, metric):
    return {"serial": report.con_serial, "par": report.con_par, "dist": report.con_dist}[metric]


def cmd_ingest(args):
    circuit = circuit_from_dict(_read_json(args.circuit))
    net = circuit_to_network(
        circuit,
        bits=args.amplitude or None,
        initial=args.initial_state or None,
    )
    _write_text(net.to_json(include_data=not args.shapes_only, indent=2), args.output)
    print(
        f"ingested {circuit.n_qubits} qubits, {len(circuit.gates)} gates -> "
        f"{net.num_vertices} tensors, {len(net.bound_edges())} bonds",
        file=sys.stderr,
    )
    return 0


def cmd_plan(args):
    net = _load_network(args.network, amplitude=args.amplitude)
    cost_cfg = _cost_config(args)
    greedy_cfg = GreedyConfig(
        samples=args.greedy_samples,
        noise_scale=args.greedy_noise,
        rng_seed=args.seed,
    )
    if args.partitions <= 1:
        plan = serial_plan(net, cost_cfg, cfg=greedy_cfg)
    else:
        part = initial_partition(net, args.partitions, args.imbalance, seed=args.seed)
        plan = build_plan(net, part, reduction_cfg=greedy_cfg, cost_cfg=cost_cfg)
    _write_text(json.dumps(plan_to_dict(plan), sort_keys=True, indent=2), args.output)
    r = plan.report
    print(
        f"k={len(plan.partitioning.blocks)} cost[{args.cost_metric}]="
        f"{_metric_value(r, args.cost_metric):.6g} mem={r.mem:.6g} "
        f"(log2 dist={r.con_dist_log2:.2f})",
        file=sys.stderr,
    )
    if args.execute:
        return _run_plan(net, plan, args)
    return 0


def cmd_anneal(args):
    net = _load_network(args.network, amplitude=args.amplitude)
    cost_cfg = _cost_config(args)
    if args.plan:
        plan = plan_from_dict(net, _read_json(args.plan), cost_cfg)
    else:
        if args.partitions <= 1:
            raise ValueError("anneal needs --plan or --partitions >= 2")
        part = initial_partition(net, args.partitions, args.imbalance, seed=args.seed)
        greedy_cfg = GreedyConfig(
            samples=args.greedy_samples, noise_scale=args.greedy_noise, rng_seed=args.seed
        )
        plan = build_plan(net, part, reduction_cfg=greedy_cfg, cost_cfg=cost_cfg)
    cfg = AnnealConfig(
        t0=args.t0,
        tf=args.tf,
        steps=args.steps,
        workers=args.workers,
        time_limit=0.0 if args.iters > 0 else args.time_limit,
        max_iters=args.iters,
        restart_threshold=args.restart_threshold,
        mode=args.mode,
        seed=args.seed,
        metric=args.cost_metric,
        cost=cost_cfg,
        reduction_samples=args.reduction_samples,
        threads=args.threads,
    )
    initial_cost = _metric_value(plan.report, args.cost_metric)
    refined, trace = refine_plan(net, plan, cfg)
    if args.trace:
        with open(args.trace, "w") as fh:
            for row in trace:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
    _write_text(json.dumps(plan_to_dict(refined), sort_keys=True, indent=2), args.output)
    final_cost = _metric_value(refined.report, args.cost_metric)
    print(
        f"anneal[{args.mode}] {len(trace)} iterations: "
        f"cost[{args.cost_metric}] {initial_cost:.6g} -> {final_cost:.6g}",
        file=sys.stderr,
    )
    if args.execute:
        return _run_plan(net, refined, args)
    return 0


def _run_plan(net, plan, args):
    kernel = getattr(args, "kernel", "matmul")
    max_entries = getattr(args, "max_entries", DEFAULT_MAX_ENTRIES)
    trace = execute_plan(net, plan.tree, kernel=kernel, max_entries=max_entries)
    out = {
        "mult_count": trace.mult_count,
        "peak_entries": trace.peak_entries,
        "resident_peak": trace.resident_peak,
        "predicted_con_serial": plan.report.con_serial,
        "shape": [net.edge(e).dim for e in trace.axis_edges],
    }
    if not trace.axis_edges:
        value = trace.scalar()
        out["value"] = [value.real, value.imag]
        out["abs"] = abs(value)
        out["prob"] = abs(value) ** 2
    if getattr(args, "emulate", False) and len(plan.partitioning.blocks) > 1:
        emu = execute_distributed_emulation(net, plan, kernel=kernel, max_entries=max_entries)
        out["emulated_seconds"] = emu.emulated_seconds
        out["serial_seconds"] = emu.serial_seconds
        out["partition_seconds"] = emu.partition_seconds
        out["fanin_seconds"] = emu.fanin_seconds
    _write_text(json.dumps(out, sort_keys=True, indent=2), getattr(args, "result_output", None))
    return 0


def cmd_execute(args):
    net = _load_network(args.network, amplitude=args.amplitude)
    if not net.has_payloads():
        raise ValueError("network carries no tensor data; ingest without --shapes-only")
    cost_cfg = _cost_config(args)
    if args.plan:
        plan = plan_from_dict(net, _read_json(args.plan), cost_cfg)
    else:
        tree = random_greedy_tree(net, cfg=GreedyConfig(rng_seed=args.seed))
        plan = serial_plan(net, cost_cfg, tree=tree)
    args.result_output = args.output
    return _run_plan(net, plan, args)


def cmd_bench(args):
    if args.circuits:
        suite = []
        for path in args.circuits:
            name = path.rsplit("/", 1)[-1].removesuffix(".json")
            try:
                suite.append((name, circuit_from_dict(_read_json(path))))
            except Exception as exc:
                suite.append((name, exc))
    else:
        suite = bundled_suite()
    named = []
    preload_errors = []
    for name, item in suite:
        if isinstance(item, Exception):
            preload_errors.append({"circuit": name, "error": f"{type(item).__name__}: {item}"})
        else:
            named.append((name, item))
    cfg = RunConfig(
        methods=tuple(args.methods.split(",")) if args.methods else METHODS,
        sweep=tuple(int(k) for k in args.sweep.split(",")) if args.sweep else RunConfig.sweep,
        epsilon=args.imbalance,
        seed=args.seed,
        budget_seconds=args.budget_seconds,
        budget_iters=args.budget_iters,
        repeats=args.repeats,
        steps=args.steps,
        workers=args.workers,
        threads=args.threads,
        amplitude=args.amplitude or "",
        cost=_cost_config(args),
    )
    report = run_pipeline(named, cfg)
    report["errors"] = preload_errors + report["errors"]
    _write_text(report_json(report), args.output)
    summary = compare_report([report])
    print(format_comparison(summary), file=sys.stderr)
    if report["errors"]:
        return 2 if report["results"] else 1
    return 0


def cmd_report(args):
    reports = [_read_json(path) for path in args.reports]
    summary = compare_report(reports)
    if args.json:
        _write_text(json.dumps(summary, sort_keys=True, indent=2), args.json)
    _write_text(format_comparison(summary), None)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tnplan",
        description="contraction planning for distributed tensor networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert a circuit JSON file to a tensor network")
    p.add_argument("circuit", help="circuit JSON file (or - for stdin)")
    p.add_argument("-o", "--output", default=None, help="output path (default stdout)")
    p.add_argument(
        "--amplitude",
        default="",
        help="output bitstring to project on (default all zeros)",
    )
    p.add_argument(
        "--initial-state",
        dest="initial_state",
        default="",
        help="initial product-state bitstring (default all zeros)",
    )
    p.add_argument(
        "--shapes-only",
        action="store_true",
        help="omit tensor entries from the output",
    )
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("plan", help="build a partitioned contraction plan")
    p.add_argument("network", help="network JSON (circuit JSON is ingested on the fly)")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--amplitude", default="", help="used only when ingesting a circuit")
    p.add_argument("--partitions", type=int, default=1, help="number of partitions")
    p.add_argument("--imbalance", type=float, default=0.03, help="allowed size imbalance")
    p.add_argument("--greedy-samples", type=int, default=32)
    p.add_argument("--greedy-noise", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--execute", action="store_true", help="run the plan after building it")
    p.add_argument("--kernel", choices=("matmul", "loops"), default="matmul")
    p.add_argument("--max-entries", type=int, default=DEFAULT_MAX_ENTRIES)
    p.add_argument("--emulate", action="store_true", help="with --execute: time partitions separately")
    _add_cost_flags(p)
    p.set_defaults(func=cmd_plan, result_output=None)

    p = sub.add_parser("anneal", help="refine a plan with simulated annealing")
    p.add_argument("network")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--amplitude", default="")
    p.add_argument("--plan", default=None, help="plan JSON to refine")
    p.add_argument("--partitions", type=int, default=0, help="build the initial plan inline")
    p.add_argument("--imbalance", type=float, default=0.03)
    p.add_argument("--greedy-samples", type=int, default=32)
    p.add_argument("--greedy-noise", type=float, default=0.3)
    p.add_argument("--t0", type=float, default=1.0)
    p.add_argument("--tf", type=float, default=0.001)
    p.add_argument("--steps", type=int, default=64, help="proposals per temperature")
    p.add_argument("--workers", type=int, default=0, help="0 = one per cpu")
    p.add_argument("--threads", type=int, default=1, help="thread pool size for workers")
    p.add_argument("--time-limit", type=float, default=10.0, help="wall budget in seconds")
    p.add_argument("--iters", type=int, default=0, help="iteration budget (overrides time limit)")
    p.add_argument("--restart-threshold", type=int, default=20)
    p.add_argument("--mode", choices=("naive", "directed"), default="naive")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reduction-samples", type=int, default=8)
    p.add_argument("--trace", default=None, help="write per-iteration JSON lines here")
    p.add_argument("--execute", action="store_true")
    p.add_argument("--kernel", choices=("matmul", "loops"), default="matmul")
    p.add_argument("--max-entries", type=int, default=DEFAULT_MAX_ENTRIES)
    p.add_argument("--emulate", action="store_true")
    _add_cost_flags(p)
    p.set_defaults(func=cmd_anneal, result_output=None)

    p = sub.add_parser("execute", help="contract a network, optionally along a saved plan")
    p.add_argument("network")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--amplitude", default="")
    p.add_argument("--plan", default=None)
    p.add_argument("--kernel", choices=("matmul", "loops"), default="matmul")
    p.add_argument(
        "--max-entries",
        type=int,
        default=DEFAULT_MAX_ENTRIES,
        help="refuse plans whose peak memory exceeds this many tensor entries",
    )
    p.add_argument("--emulate", action="store_true", help="also emulate distributed execution")
    p.add_argument("--seed", type=int, default=0)
    _add_cost_flags(p)
    p.set_defaults(func=cmd_execute)

    p = sub.add_parser("bench", help="run the batch pipeline over a circuit suite")
    p.add_argument("circuits", nargs="*", help="circuit JSON files (default: bundled suite)")
    p.add_argument("-o", "--output", default=None, help="report JSON path (default stdout)")
    p.add_argument("--methods", default="", help=f"comma list from {','.join(METHODS)}")
    p.add_argument("--sweep", default="", help="comma list of partition counts")
    p.add_argument("--imbalance", type=float, default=0.03)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget-seconds", type=float, default=10.0, help="anneal budget per method+circuit")
    p.add_argument("--budget-iters", type=int, default=0, help="iteration budget (deterministic reports)")
    p.add_argument("--repeats", type=int, default=2)
    p.add_argument("--steps", type=int, default=64)
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--amplitude", default="")
    _add_cost_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="summarize bench reports")
    p.add_argument("reports", nargs="+", help="report JSON files")
    p.add_argument("--json", default=None, help="also write the summary as JSON here")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
