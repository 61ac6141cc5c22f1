#!/usr/bin/env python3
"""Check that the distributed cost metric predicts emulated wall time.

Builds partitioned plans over seeded random tensor networks, executes each
under the distributed emulation, and reports the Pearson correlation between
the predicted cost and the emulated seconds.

    python3 scripts/correlation_experiment.py
    python3 scripts/correlation_experiment.py --ks 2,4,8 --csv points.csv
"""

import argparse
import math
import sys
import time

import numpy as np

from tnplan.execute import execute_distributed_emulation
from tnplan.network import TensorNetwork
from tnplan.partition import initial_partition
from tnplan.plan import build_plan

# (tensor count, max bond dimension, network seed)
DEFAULT_SPECS = (
    (10, 3, 101),
    (12, 4, 102),
    (14, 4, 103),
    (16, 5, 104),
    (16, 6, 105),
    (18, 6, 106),
    (18, 7, 107),
    (20, 7, 108),
)


def random_network(rng, n, max_dim, max_degree=4, p_open=0.1):
    """Connected random network: a spanning tree plus extra bonds."""
    net = TensorNetwork()
    degrees = [0] * n
    axes = [[] for _ in range(n)]

    def add_axis(v, dim):
        axes[v].append(dim)
        degrees[v] += 1
        return len(axes[v]) - 1

    bonds = []
    for v in range(1, n):
        u = int(rng.integers(v))
        dim = int(rng.integers(2, max_dim + 1))
        bonds.append((u, add_axis(u, dim), v, add_axis(v, dim)))
    extras = int(rng.integers(n // 2 + 1))
    for _ in range(extras):
        u, v = rng.choice(n, size=2, replace=False)
        u, v = int(u), int(v)
        if degrees[u] >= max_degree or degrees[v] >= max_degree:
            continue
        dim = int(rng.integers(2, max_dim + 1))
        bonds.append((u, add_axis(u, dim), v, add_axis(v, dim)))
    for v in range(n):
        if degrees[v] < max_degree and rng.random() < p_open:
            add_axis(v, int(rng.integers(2, max_dim + 1)))
    for v in range(n):
        if not axes[v]:
            axes[v].append(2)
        shape = tuple(axes[v])
        data = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        net.add_tensor(list(shape), payload=data / math.sqrt(2.0))
    for u, a, v, b in bonds:
        net.bond(u, a, v, b)
    return net


def pearson(xs, ys):
    return float(np.corrcoef(xs, ys)[0, 1])


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--ks", default="2,4", help="partition counts per network")
    parser.add_argument("--csv", default=None, help="write (cost, seconds) points here")
    return parser.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    ks = [int(k) for k in args.ks.split(",")]
    costs, seconds = [], []
    print(f"{'n':>4} {'dim':>4} {'k':>3} {'con_dist':>14} {'emulated s':>12}")
    started = time.perf_counter()
    for idx, (n, max_dim, seed) in enumerate(DEFAULT_SPECS):
        rng = np.random.default_rng(seed)
        net = random_network(rng, n, max_dim)
        for k in ks:
            plan = build_plan(net, initial_partition(net, k, seed=idx))
            emu = execute_distributed_emulation(net, plan)
            costs.append(plan.report.con_dist)
            seconds.append(emu.emulated_seconds)
            print(f"{n:>4} {max_dim:>4} {k:>3} {costs[-1]:>14.6g} {seconds[-1]:>12.6g}")
    elapsed = time.perf_counter() - started
    r = pearson(costs, seconds)
    print(f"\nPearson r = {r:.4f} over {len(costs)} plans ({elapsed:.1f}s)")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("con_dist,emulated_seconds\n")
            for c, s in zip(costs, seconds):
                fh.write(f"{c!r},{s!r}\n")
        print(f"points -> {args.csv}", file=sys.stderr)
    return 0 if r >= 0.9 else 1


if __name__ == "__main__":
    raise SystemExit(main())
