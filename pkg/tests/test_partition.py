"""Balanced partitioning: validity, ring bisection, refinement, determinism."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tnplan.network import TensorNetwork
from tnplan.partition import (
    Partitioning,
    balance_limit,
    cut_weight,
    initial_partition,
    refine_partition,
    validate,
)

from oracles import random_network


def ring(n, dim=2):
    net = TensorNetwork()
    for _ in range(n):
        net.add_tensor([dim, dim])
    for v in range(n):
        net.bond(v, 1, (v + 1) % n, 0)
    return net


def test_validate_diagnoses_each_defect():
    net = ring(4)
    ok, problems = validate(Partitioning([{0, 1}, {2, 3}]), net)
    assert ok and problems == []
    ok, problems = validate(Partitioning([{0, 1, 2, 3}, set()]), net)
    assert not ok and any("empty" in p for p in problems)
    ok, problems = validate(Partitioning([{0, 1, 2}, {2, 3}]), net)
    assert not ok and any("2" in p for p in problems)
    ok, problems = validate(Partitioning([{0, 1}, {3}]), net)
    assert not ok
    ok, problems = validate(Partitioning([{0, 1}, {2, 9}]), net)
    assert not ok


def test_cut_weight_counts_crossing_bonds_in_log2():
    net = ring(8)
    part = Partitioning([frozenset(range(4)), frozenset(range(4, 8))])
    assert cut_weight(part, net) == 2.0  # two dim-2 bonds cross
    net3 = ring(6, dim=3)
    part3 = Partitioning([frozenset(range(3)), frozenset(range(3, 6))])
    assert cut_weight(part3, net3) == pytest.approx(2 * math.log2(3))
    with pytest.raises(ValueError):
        cut_weight(Partitioning([{0}, {5}]), net)


def test_eight_ring_bisection_is_optimal():
    """The 2-bond cut is the brute-force optimum over balanced bisections,
    and the partitioner finds a cut of that weight."""
    net = ring(8)
    best = math.inf
    for half in itertools.combinations(range(8), 4):
        part = Partitioning([frozenset(half), frozenset(range(8)) - frozenset(half)])
        best = min(best, cut_weight(part, net))
    assert best == 2.0
    found = initial_partition(net, 2, seed=0)
    assert cut_weight(found, net) == 2.0
    sizes = sorted(len(b) for b in found.blocks)
    assert sizes == [4, 4]


def test_partition_count_bounds():
    net = ring(4)
    with pytest.raises(ValueError):
        initial_partition(net, 0)
    with pytest.raises(ValueError):
        initial_partition(net, 5)
    one = initial_partition(net, 1)
    assert one.blocks == [frozenset({0, 1, 2, 3})]
    full = initial_partition(net, 4)
    assert sorted(len(b) for b in full.blocks) == [1, 1, 1, 1]


def test_balance_limit_formula():
    assert balance_limit(8, 2, 0.0) == 4
    assert balance_limit(8, 2, 0.25) == 5
    assert balance_limit(10, 3, 0.03) == 4  # ceil(10/3)=4, floor(4.12)=4


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_initial_partition_is_valid_and_balanced(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng, n_min=4, payloads=False)
    k = int(rng.integers(1, net.num_vertices + 1))
    eps = float(rng.choice([0.0, 0.03, 0.2]))
    part = initial_partition(net, k, epsilon=eps, seed=seed)
    ok, problems = validate(part, net)
    assert ok, problems
    assert len(part.blocks) == k
    limit = balance_limit(net.num_vertices, k, eps)
    assert max(len(b) for b in part.blocks) <= limit


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_initial_partition_is_deterministic(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng, n_min=4, payloads=False)
    k = int(rng.integers(2, net.num_vertices + 1))
    a = initial_partition(net, k, seed=seed)
    b = initial_partition(net, k, seed=seed)
    assert a.blocks == b.blocks


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_refinement_never_increases_cut_weight(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng, n_min=5, payloads=False)
    k = int(rng.integers(2, min(5, net.num_vertices) + 1))
    part = initial_partition(net, k, seed=seed)
    refined, history = refine_partition(part, net)
    assert history == sorted(history, reverse=True)
    assert cut_weight(refined, net) == history[-1]
    limit = balance_limit(net.num_vertices, k, part.epsilon)
    assert max(len(b) for b in refined.blocks) <= limit
    ok, problems = validate(refined, net)
    assert ok, problems
