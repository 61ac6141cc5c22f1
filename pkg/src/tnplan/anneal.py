"""Simulated-annealing refinement of partitioned contraction plans.

The neighborhood move picks a random subtree of a random partition's
contraction tree and migrates its leaf tensors to another partition,
chosen either uniformly (naive) or by the pair objective between the
moved tensor and each candidate partition's result tensor (directed).
Both affected partitions get fresh greedy trees, the fan-in path is
re-searched, and the candidate is re-costed.

Acceptance uses the cost ratio rather than the difference, so the
schedule is insensitive to the absolute scale of the cost metric:
P(accept) = exp(-log(c_new / c_current) / T), with values above 1
meaning certain acceptance.  The temperature decays exponentially from
t0 to tf over the configured budget, which may be wall-clock seconds or
a fixed iteration count; only the latter is bit-reproducible, since the
iteration tally of a timed run depends on machine speed.

Each iteration fans the same starting state out to ``workers`` logical
replicas with seeds derived from (seed, iteration, worker); the best
replica result wins, with ties going to the lowest worker index.  The
replicas are independent, so the outcome does not depend on how many OS
threads actually run them.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from time import perf_counter

import numpy as np

from .costs import CostConfig, con_par, con_serial, con_dist, cost_report, dims_product
from .partition import Partitioning, validate
from .pathfind import GreedyConfig, greedy_tree, reduction_path
from .plan import Plan
from .tree import compose_plan_tree


class NoMoveError(RuntimeError):
    """No partition has a movable proper subtree."""


@dataclass
class AnnealConfig:
    t0: float = 1.0
    tf: float = 0.001
    steps: int = 64
    workers: int = 0
    time_limit: float = 10.0
    max_iters: int = 0
    restart_threshold: int = 20
    mode: str = "naive"
    seed: int = 0
    metric: str = "dist"
    cost: CostConfig = field(default_factory=CostConfig)
    reduction_samples: int = 8
    reduction_noise: float = 0.3
    threads: int = 1
    check_invariants: bool = False

    def __post_init__(self):
        if self.t0 <= 0 or self.tf <= 0 or self.tf > self.t0:
            raise ValueError("temperatures must satisfy 0 < tf <= t0")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.workers < 0:
            raise ValueError("workers must be >= 1, or 0 for auto")
        if self.workers == 0:
            self.workers = os.cpu_count() or 1
        if self.mode not in ("naive", "directed"):
            raise ValueError(f"mode must be 'naive' or 'directed', got {self.mode!r}")
        if self.metric not in ("dist", "serial", "par"):
            raise ValueError(f"metric must be dist, serial or par, got {self.metric!r}")
        if self.max_iters <= 0 and self.time_limit <= 0:
            raise ValueError("either max_iters or a positive time_limit is required")
        if self.restart_threshold < 1:
            raise ValueError("restart_threshold must be >= 1")


@dataclass(frozen=True)
class AnnealState:
    """One point of the search space: a full plan plus its cached costs."""

    partitioning: Partitioning
    partition_trees: tuple
    reduction_nested: object
    tree: object
    part_roots: tuple
    local_costs: tuple
    cost: float


def acceptance_probability(current, candidate, temperature):
    """Scale-free Metropolis rule on the cost ratio.

    Returns exp(-log(candidate / current) / temperature); anything >= 1
    means the move is always taken.  Costs and temperature must be
    positive.
    """
    if current <= 0 or candidate <= 0:
        raise ValueError(f"costs must be positive, got {current} -> {candidate}")
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    # Log difference rather than log of the quotient: the quotient can
    # under- or overflow for extreme cost ratios.
    exponent = (math.log(current) - math.log(candidate)) / temperature
    if exponent > 700.0:
        return math.inf
    return math.exp(exponent)


def temperature_at(progress, cfg):
    """Exponential schedule from t0 to tf as progress runs from 0 to 1."""
    if not 0.0 <= progress <= 1.0:
        raise ValueError(f"progress must lie in [0, 1], got {progress}")
    return cfg.t0 * (cfg.tf / cfg.t0) ** progress


def _intra_metric(cfg):
    return con_par if cfg.cost.intra_node == "par" else con_serial


def _state_cost(cfg, tree, blocks, roots, local_costs):
    if cfg.metric == "serial":
        return con_serial(tree)
    if cfg.metric == "par":
        return con_par(tree)
    return con_dist(tree, blocks, cfg.cost, subtree_roots=roots, local_costs=local_costs)


def state_from_plan(plan, cfg):
    intra = _intra_metric(cfg)
    local_costs = tuple(intra(plan.tree, r) for r in plan.part_roots)
    cost = _state_cost(cfg, plan.tree, plan.partitioning.blocks, plan.part_roots, local_costs)
    return AnnealState(
        plan.partitioning,
        tuple(plan.partition_trees),
        plan.reduction_nested,
        plan.tree,
        tuple(plan.part_roots),
        local_costs,
        cost,
    )


def state_to_plan(net, state, cost_cfg=None):
    report = cost_report(
        state.tree, state.partitioning.blocks, cost_cfg, subtree_roots=list(state.part_roots)
    )
    return Plan(
        net,
        state.partitioning,
        list(state.partition_trees),
        state.reduction_nested,
        state.tree,
        list(state.part_roots),
        report,
    )


def select_target_naive(n_blocks, k_src, rng):
    """Uniform choice among the other partitions."""
    others = [k for k in range(n_blocks) if k != k_src]
    return others[int(rng.integers(len(others)))]


def select_target_directed(net, partition_trees, k_src, moved_legs):
    """Partition whose result tensor pairs best with the moved tensor.

    Maximizes |moved| + |target| - |moved . target| over targets; ties go
    to the lowest partition index.
    """
    moved_size = dims_product(net, moved_legs)
    best_k = None
    best_obj = -math.inf
    for k, t in enumerate(partition_trees):
        if k == k_src:
            continue
        dest_legs = t.legs(t.root)
        result = dims_product(net, moved_legs ^ dest_legs)
        obj = moved_size + dims_product(net, dest_legs) - result
        if obj > best_obj:
            best_obj = obj
            best_k = k
    return best_k


def _movable_blocks(blocks):
    return [i for i, b in enumerate(blocks) if len(b) >= 2]


def select_neighbor(net, state, cfg, rng):
    """One rebalancing move: migrate a random subtree's tensors, rebuild, re-cost."""
    blocks = state.partitioning.blocks
    eligible = _movable_blocks(blocks)
    if len(blocks) < 2 or not eligible:
        raise NoMoveError("no partition exposes a movable proper subtree")
    k_src = eligible[int(rng.integers(len(eligible)))]
    src_tree = state.partition_trees[k_src]
    candidates = [t for t in sorted(src_tree.nodes()) if t != src_tree.root]
    node = candidates[int(rng.integers(len(candidates)))]
    moved = frozenset(src_tree.subtree_leaf_tensors(node))

    if cfg.mode == "directed":
        k_dst = select_target_directed(net, state.partition_trees, k_src, src_tree.legs(node))
    else:
        k_dst = select_target_naive(len(blocks), k_src, rng)

    new_blocks = list(blocks)
    new_blocks[k_src] = blocks[k_src] - moved
    new_blocks[k_dst] = blocks[k_dst] | moved
    partitioning = Partitioning(new_blocks, state.partitioning.epsilon)

    trees = list(state.partition_trees)
    trees[k_src] = greedy_tree(net, new_blocks[k_src])
    trees[k_dst] = greedy_tree(net, new_blocks[k_dst])
    legs = [t.legs(t.root) for t in trees]
    red_cfg = GreedyConfig(
        samples=cfg.reduction_samples,
        noise_scale=cfg.reduction_noise,
        rng_seed=int(rng.integers(2 ** 63)),
    )
    reduction_nested = reduction_path(net, legs, red_cfg).to_nested()
    composed = compose_plan_tree(net, trees, reduction_nested)
    roots = composed.subtree_roots(new_blocks)
    if roots is None:
        raise RuntimeError("composed tree lost a partition subtree")

    intra = _intra_metric(cfg)
    local_costs = list(state.local_costs)
    local_costs[k_src] = intra(composed, roots[k_src])
    local_costs[k_dst] = intra(composed, roots[k_dst])
    cost = _state_cost(cfg, composed, new_blocks, roots, local_costs)

    if cfg.check_invariants:
        ok, problems = validate(partitioning, net)
        assert ok, f"move produced an invalid partitioning: {problems}"
        assert composed.accepts_partitioning(new_blocks)
        for i, t in enumerate(trees):
            assert set(t.leaves()) == set(new_blocks[i])
        assert moved and moved != blocks[k_src]

    return AnnealState(
        partitioning,
        tuple(trees),
        reduction_nested,
        composed,
        tuple(roots),
        tuple(local_costs),
        cost,
    )


def do_steps(net, n, state, temperature, cfg, rng):
    """Run ``n`` sequential proposals at a fixed temperature; returns the end state."""
    current = state
    for _ in range(n):
        try:
            candidate = select_neighbor(net, current, cfg, rng)
        except NoMoveError:
            break
        if acceptance_probability(current.cost, candidate.cost, temperature) >= rng.random():
            current = candidate
    return current


def _worker_rng(seed, iteration, worker):
    entropy = seed & ((1 << 128) - 1)
    return np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=(iteration, worker)))


@dataclass
class AnnealResult:
    best: AnnealState
    trace: list
    iterations: int


def anneal(net, initial, cfg=None):
    """Refine a plan or state; returns the best state ever visited plus a trace.

    Every iteration restarts ``workers`` seeded replicas from the current
    state, each running ceil(steps / workers) proposals at the current
    temperature, and adopts the cheapest outcome.  When the adopted state
    has not improved on the best for ``restart_threshold`` iterations,
    the search resumes from the best state.  The trace logs one record
    per iteration.
    """
    cfg = cfg or AnnealConfig()
    state = initial if isinstance(initial, AnnealState) else state_from_plan(initial, cfg)
    best = current = state
    if len(state.partitioning.blocks) < 2 or not _movable_blocks(state.partitioning.blocks):
        return AnnealResult(best, [], 0)

    n_per = math.ceil(cfg.steps / cfg.workers)
    trace = []
    i = -1
    i_best = -1
    started = perf_counter()
    pool = ThreadPoolExecutor(cfg.threads) if cfg.threads > 1 else None
    try:
        while True:
            if cfg.max_iters > 0:
                if i + 1 >= cfg.max_iters:
                    break
                progress = (i + 1) / cfg.max_iters
            else:
                elapsed = perf_counter() - started
                if elapsed >= cfg.time_limit:
                    break
                progress = elapsed / cfg.time_limit
            i += 1
            temperature = temperature_at(progress, cfg)

            def run_worker(w, start=current, temp=temperature, it=i):
                rng = _worker_rng(cfg.seed, it, w)
                s = do_steps(net, n_per, start, temp, cfg, rng)
                return (s.cost, w, s)

            if pool is not None:
                results = list(pool.map(run_worker, range(cfg.workers)))
            else:
                results = [run_worker(w) for w in range(cfg.workers)]
            current = min(results, key=lambda r: (r[0], r[1]))[2]

            improved = restarted = False
            if current.cost < best.cost:
                best = current
                i_best = i
                improved = True
            elif i - i_best >= cfg.restart_threshold:
                current = best
                i_best = i
                restarted = True
            trace.append(
                {
                    "iteration": i,
                    "temperature": temperature,
                    "cost": current.cost,
                    "best": best.cost,
                    "improved": improved,
                    "restarted": restarted,
                }
            )
    finally:
        if pool is not None:
            pool.shutdown()
    return AnnealResult(best, trace, i + 1)


def refine_plan(net, plan, cfg=None, cost_cfg=None):
    """Anneal a plan and return (refined plan, trace)."""
    cfg = cfg or AnnealConfig()
    result = anneal(net, plan, cfg)
    return state_to_plan(net, result.best, cost_cfg or cfg.cost), result.trace
