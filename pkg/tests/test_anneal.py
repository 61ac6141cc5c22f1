"""Tests for the simulated-annealing refinement loop."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from tnplan.anneal import (
    AnnealConfig,
    AnnealResult,
    NoMoveError,
    acceptance_probability,
    anneal,
    do_steps,
    refine_plan,
    select_neighbor,
    select_target_directed,
    state_from_plan,
    state_to_plan,
    temperature_at,
)
from tnplan.circuits import circuit_to_network
from tnplan.corpus import ghz_circuit
from tnplan.costs import CostConfig, con_dist
from tnplan.network import TensorNetwork
from tnplan.partition import initial_partition, validate
from tnplan.plan import build_plan, plan_to_dict
from tnplan.tree import ContractionTree


def chain_net(dims=(2, 4, 8, 3)):
    """Open chain: T0[d0,d1] - T1[d1,d2] - T2[d2,d3]."""
    net = TensorNetwork()
    a = net.add_tensor([dims[0], dims[1]])
    b = net.add_tensor([dims[1], dims[2]])
    c = net.add_tensor([dims[2], dims[3]])
    net.bond(a, 1, b, 0)
    net.bond(b, 1, c, 0)
    return net


def ghz_net(n=6):
    return circuit_to_network(ghz_circuit(n), bits="0" * n)


def planned_state(net, k=2, seed=0, cfg=None):
    cfg = cfg or AnnealConfig(workers=2, max_iters=4, seed=seed)
    part = initial_partition(net, k, seed=seed)
    plan = build_plan(net, part, cost_cfg=cfg.cost)
    return plan, state_from_plan(plan, cfg), cfg


# ---------------------------------------------------------------------------
# acceptance probability
# ---------------------------------------------------------------------------


class TestAcceptanceProbability:
    def test_equal_costs_always_accepted(self):
        for t in (0.001, 0.5, 1.0, 100.0):
            assert acceptance_probability(7.0, 7.0, t) == 1.0

    def test_doubling_at_unit_temperature_is_half(self):
        assert acceptance_probability(10.0, 20.0, 1.0) == pytest.approx(0.5, rel=1e-12)

    def test_downhill_always_at_least_one(self):
        for t in (0.01, 1.0, 50.0):
            assert acceptance_probability(20.0, 10.0, t) >= 1.0

    def test_scale_invariance(self):
        base = acceptance_probability(3.0, 5.0, 0.7)
        for lam in (1e-6, 0.25, 1.0, 17.0, 1e6):
            scaled = acceptance_probability(3.0 * lam, 5.0 * lam, 0.7)
            assert scaled == pytest.approx(base, rel=1e-12)

    def test_extreme_ratio_saturates_to_infinity(self):
        # exponent > 700 would overflow exp(); the rule reports "certain".
        assert acceptance_probability(1e300, 1e-300, 1.0) == math.inf

    def test_rejects_nonpositive_inputs(self):
        with pytest.raises(ValueError):
            acceptance_probability(0.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            acceptance_probability(1.0, -2.0, 1.0)
        with pytest.raises(ValueError):
            acceptance_probability(1.0, 1.0, 0.0)

    @given(
        c=st.floats(min_value=1e-6, max_value=1e6),
        ratio=st.floats(min_value=1e-3, max_value=1e3),
        temp=st.floats(min_value=1e-3, max_value=1e3),
        lam=st.floats(min_value=1e-6, max_value=1e6),
    )
    @settings(max_examples=200, deadline=None)
    def test_scale_invariance_property(self, c, ratio, temp, lam):
        base = acceptance_probability(c, c * ratio, temp)
        scaled = acceptance_probability(c * lam, c * ratio * lam, temp)
        if math.isinf(base):
            assert math.isinf(scaled)
        else:
            assert scaled == pytest.approx(base, rel=1e-9)


# ---------------------------------------------------------------------------
# temperature schedule
# ---------------------------------------------------------------------------


class TestTemperatureSchedule:
    def test_endpoints(self):
        cfg = AnnealConfig(t0=2.0, tf=0.005, max_iters=1)
        assert temperature_at(0.0, cfg) == pytest.approx(2.0)
        assert temperature_at(1.0, cfg) == pytest.approx(0.005)

    def test_monotone_decreasing(self):
        cfg = AnnealConfig(t0=1.0, tf=0.001, max_iters=1)
        temps = [temperature_at(p, cfg) for p in np.linspace(0.0, 1.0, 33)]
        assert all(a > b for a, b in zip(temps, temps[1:]))

    def test_constant_when_t0_equals_tf(self):
        cfg = AnnealConfig(t0=0.7, tf=0.7, max_iters=1)
        for p in (0.0, 0.3, 1.0):
            assert temperature_at(p, cfg) == pytest.approx(0.7)

    def test_progress_out_of_range_rejected(self):
        cfg = AnnealConfig(max_iters=1)
        with pytest.raises(ValueError):
            temperature_at(-0.1, cfg)
        with pytest.raises(ValueError):
            temperature_at(1.1, cfg)


# ---------------------------------------------------------------------------
# configuration validation
# ---------------------------------------------------------------------------


class TestAnnealConfig:
    def test_bad_temperatures(self):
        with pytest.raises(ValueError, match="temperatures"):
            AnnealConfig(t0=0.0)
        with pytest.raises(ValueError, match="temperatures"):
            AnnealConfig(t0=1.0, tf=2.0)
        with pytest.raises(ValueError, match="temperatures"):
            AnnealConfig(tf=-1.0)

    def test_bad_steps_and_threshold(self):
        with pytest.raises(ValueError, match="steps"):
            AnnealConfig(steps=0)
        with pytest.raises(ValueError, match="restart_threshold"):
            AnnealConfig(restart_threshold=0)

    def test_workers_auto_resolves(self):
        cfg = AnnealConfig(workers=0, max_iters=1)
        assert cfg.workers >= 1
        with pytest.raises(ValueError, match="workers"):
            AnnealConfig(workers=-1)

    def test_bad_mode_and_metric(self):
        with pytest.raises(ValueError, match="mode"):
            AnnealConfig(mode="random")
        with pytest.raises(ValueError, match="metric"):
            AnnealConfig(metric="mem")

    def test_requires_some_budget(self):
        with pytest.raises(ValueError, match="max_iters"):
            AnnealConfig(max_iters=0, time_limit=0.0)
        # either budget alone is fine
        AnnealConfig(max_iters=5, time_limit=0.0)
        AnnealConfig(max_iters=0, time_limit=1.0)


# ---------------------------------------------------------------------------
# directed target selection
# ---------------------------------------------------------------------------


class TestDirectedSelection:
    def test_chain_prefers_heavier_contraction(self):
        # Moving T1 (size 4*8=32): pairing with T2 (size 8*3=24) removes the
        # shared dim-8 edge (result 4*3=12, objective 32+24-12=44) and beats
        # pairing with T0 (objective 8+32-16=24).
        net = chain_net()
        trees = [ContractionTree.from_pairs(net, [], leaves=[i]) for i in range(3)]
        moved = trees[1].legs(trees[1].root)
        assert select_target_directed(net, trees, 1, moved) == 2

    def test_tie_breaks_to_lowest_index(self):
        # Symmetric chain: both neighbours of the middle tensor offer the
        # same objective, so the lowest partition index wins.
        net = chain_net(dims=(3, 4, 4, 3))
        trees = [ContractionTree.from_pairs(net, [], leaves=[i]) for i in range(3)]
        moved = trees[1].legs(trees[1].root)
        assert select_target_directed(net, trees, 1, moved) == 0

    def test_source_partition_never_selected(self):
        net = chain_net()
        trees = [ContractionTree.from_pairs(net, [], leaves=[i]) for i in range(3)]
        for src in range(3):
            moved = trees[src].legs(trees[src].root)
            assert select_target_directed(net, trees, src, moved) != src


# ---------------------------------------------------------------------------
# neighbour moves
# ---------------------------------------------------------------------------


class TestSelectNeighbor:
    def test_move_preserves_validity(self):
        net = ghz_net(6)
        plan, state, cfg = planned_state(net, k=2, seed=3)
        cfg.check_invariants = True
        rng = np.random.default_rng(7)
        nxt = select_neighbor(net, state, cfg, rng)
        ok, problems = validate(nxt.partitioning, net)
        assert ok, problems
        assert nxt.tree.accepts_partitioning(nxt.partitioning.blocks)
        assert nxt.cost > 0

    def test_cached_cost_matches_fresh_evaluation(self):
        net = ghz_net(6)
        plan, state, cfg = planned_state(net, k=3, seed=1)
        rng = np.random.default_rng(11)
        for _ in range(5):
            state = select_neighbor(net, state, cfg, rng)
            fresh = con_dist(state.tree, state.partitioning.blocks, cfg.cost)
            assert state.cost == fresh

    def test_all_singletons_raise(self):
        net = chain_net()
        cfg = AnnealConfig(workers=1, max_iters=1)
        part = initial_partition(net, net.num_vertices, seed=0)
        plan = build_plan(net, part, cost_cfg=cfg.cost)
        state = state_from_plan(plan, cfg)
        with pytest.raises(NoMoveError):
            select_neighbor(net, state, cfg, np.random.default_rng(0))

    @given(seed=st.integers(0, 10**6))
    @settings(max_examples=20, deadline=None)
    def test_random_walks_stay_valid(self, seed):
        rng = np.random.default_rng(seed)
        net = oracles.random_network(rng, n_min=6, n_max=10, max_dim=3, payloads=False)
        cfg = AnnealConfig(workers=1, max_iters=1, check_invariants=True, seed=seed)
        part = initial_partition(net, 2, seed=seed)
        plan = build_plan(net, part, cost_cfg=cfg.cost)
        state = state_from_plan(plan, cfg)
        walk = np.random.default_rng(seed + 1)
        for _ in range(4):
            try:
                state = select_neighbor(net, state, cfg, walk)
            except NoMoveError:
                break
            ok, problems = validate(state.partitioning, net)
            assert ok, problems


# ---------------------------------------------------------------------------
# the annealing loop
# ---------------------------------------------------------------------------


class TestAnneal:
    def test_result_never_worse_than_initial(self):
        for seed in range(4):
            net = ghz_net(6)
            plan, state, _ = planned_state(net, k=2, seed=seed)
            cfg = AnnealConfig(workers=2, steps=8, max_iters=12, seed=seed)
            result = anneal(net, state, cfg)
            assert result.best.cost <= state.cost

    def test_trace_shape_and_bookkeeping(self):
        net = ghz_net(6)
        plan, state, _ = planned_state(net, k=2, seed=0)
        cfg = AnnealConfig(workers=2, steps=8, max_iters=15, restart_threshold=4, seed=0)
        result = anneal(net, state, cfg)
        assert isinstance(result, AnnealResult)
        assert result.iterations == 15
        assert len(result.trace) == 15
        best_so_far = math.inf
        for i, row in enumerate(result.trace):
            assert row["iteration"] == i
            assert set(row) == {
                "iteration",
                "temperature",
                "cost",
                "best",
                "improved",
                "restarted",
            }
            assert not (row["improved"] and row["restarted"])
            best_so_far = min(best_so_far, row["cost"])
            assert row["best"] == best_so_far
        temps = [row["temperature"] for row in result.trace]
        assert all(a > b for a, b in zip(temps, temps[1:]))

    def test_restart_resumes_from_best(self):
        net = ghz_net(6)
        plan, state, _ = planned_state(net, k=2, seed=0)
        cfg = AnnealConfig(
            t0=2.0, tf=1.0, workers=1, steps=4, max_iters=40, restart_threshold=3, seed=5
        )
        result = anneal(net, state, cfg)
        restarts = [row for row in result.trace if row["restarted"]]
        assert restarts, "expected at least one restart at high temperature"
        # Replay the bookkeeping rule: an improvement resets the stall
        # counter; once it reaches the threshold the walk restarts from the
        # best state (so the logged cost snaps back to the best).
        best = state.cost
        last_event = -1
        for i, row in enumerate(result.trace):
            if row["cost"] < best:
                expect = (True, False)
                best = row["cost"]
                last_event = i
            elif i - last_event >= cfg.restart_threshold:
                expect = (False, True)
                last_event = i
                assert row["cost"] == best
            else:
                expect = (False, False)
            assert (row["improved"], row["restarted"]) == expect, f"iteration {i}"

    def test_plan_and_state_inputs_agree(self):
        net = ghz_net(6)
        cfg = AnnealConfig(workers=2, steps=8, max_iters=6, seed=2)
        part = initial_partition(net, 2, seed=2)
        plan = build_plan(net, part, cost_cfg=cfg.cost)
        from_plan = anneal(net, plan, cfg)
        from_state = anneal(net, state_from_plan(plan, cfg), cfg)
        assert from_plan.best.cost == from_state.best.cost
        assert from_plan.trace == from_state.trace

    def test_no_movable_blocks_returns_initial(self):
        net = chain_net()
        cfg = AnnealConfig(workers=1, max_iters=10, seed=0)
        part = initial_partition(net, net.num_vertices, seed=0)
        plan = build_plan(net, part, cost_cfg=cfg.cost)
        result = anneal(net, plan, cfg)
        assert result.iterations == 0
        assert result.trace == []
        assert result.best.cost == state_from_plan(plan, cfg).cost

    def test_single_block_returns_initial(self):
        net = chain_net()
        cfg = AnnealConfig(workers=1, max_iters=10, seed=0)
        plan = build_plan(net, initial_partition(net, 1, seed=0), cost_cfg=cfg.cost)
        result = anneal(net, plan, cfg)
        assert result.iterations == 0 and result.trace == []

    def test_directed_mode_runs_and_improves(self):
        net = ghz_net(8)
        cfg = AnnealConfig(workers=2, steps=8, max_iters=20, mode="directed", seed=1)
        part = initial_partition(net, 4, seed=1)
        plan = build_plan(net, part, cost_cfg=cfg.cost)
        state = state_from_plan(plan, cfg)
        result = anneal(net, state, cfg)
        assert result.best.cost <= state.cost

    def test_serial_metric_optimizes_serial_cost(self):
        net = ghz_net(6)
        cfg = AnnealConfig(workers=1, steps=4, max_iters=8, metric="serial", seed=0)
        plan = build_plan(net, initial_partition(net, 2, seed=0), cost_cfg=cfg.cost)
        state = state_from_plan(plan, cfg)
        from tnplan.costs import con_serial

        assert state.cost == con_serial(state.tree)
        result = anneal(net, state, cfg)
        assert result.best.cost <= state.cost


# ---------------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------------


class TestDeterminism:
    def test_identical_runs_identical_results(self):
        net = ghz_net(6)
        outs = []
        for _ in range(2):
            cfg = AnnealConfig(workers=3, steps=9, max_iters=10, seed=42)
            plan = build_plan(net, initial_partition(net, 2, seed=42), cost_cfg=cfg.cost)
            refined, trace = refine_plan(net, plan, cfg)
            outs.append((plan_to_dict(refined), trace))
        assert outs[0][0] == outs[1][0]
        assert outs[0][1] == outs[1][1]

    def test_thread_count_does_not_change_results(self):
        net = ghz_net(6)
        outs = []
        for threads in (1, 3):
            cfg = AnnealConfig(workers=3, steps=9, max_iters=10, seed=7, threads=threads)
            plan = build_plan(net, initial_partition(net, 2, seed=7), cost_cfg=cfg.cost)
            refined, trace = refine_plan(net, plan, cfg)
            outs.append((plan_to_dict(refined), trace))
        assert outs[0][0] == outs[1][0]
        assert outs[0][1] == outs[1][1]

    def test_seed_changes_the_walk(self):
        net = ghz_net(6)
        traces = []
        for seed in (0, 1):
            cfg = AnnealConfig(workers=2, steps=8, max_iters=10, seed=seed)
            plan = build_plan(net, initial_partition(net, 2, seed=0), cost_cfg=cfg.cost)
            _, trace = refine_plan(net, plan, cfg)
            traces.append([row["cost"] for row in trace])
        assert traces[0] != traces[1]


# ---------------------------------------------------------------------------
# state <-> plan round trip
# ---------------------------------------------------------------------------


class TestStatePlanRoundTrip:
    def test_round_trip_preserves_everything(self):
        net = ghz_net(6)
        cfg = AnnealConfig(workers=1, max_iters=1, seed=0)
        plan = build_plan(net, initial_partition(net, 2, seed=0), cost_cfg=cfg.cost)
        state = state_from_plan(plan, cfg)
        back = state_to_plan(net, state, cfg.cost)
        assert plan_to_dict(back) == plan_to_dict(plan)
        assert state.cost == plan.report.con_dist

    def test_state_cost_tracks_metric_choice(self):
        net = ghz_net(6)
        plan = build_plan(net, initial_partition(net, 2, seed=0))
        from tnplan.costs import con_par, con_serial

        for metric, fn in (("serial", con_serial), ("par", con_par)):
            cfg = AnnealConfig(workers=1, max_iters=1, metric=metric)
            assert state_from_plan(plan, cfg).cost == fn(plan.tree)

    def test_do_steps_returns_reachable_state(self):
        net = ghz_net(6)
        plan, state, cfg = planned_state(net, k=2, seed=0)
        rng = np.random.default_rng(3)
        out = do_steps(net, 6, state, 1.0, cfg, rng)
        ok, problems = validate(out.partitioning, net)
        assert ok, problems
        assert out.tree.accepts_partitioning(out.partitioning.blocks)
