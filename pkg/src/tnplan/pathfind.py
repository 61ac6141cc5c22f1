"""Greedy contraction-order search, with noisy multi-sample restarts.

The deterministic pass repeatedly contracts the pair of intermediates that
maximizes the memory-reduction objective |A| + |B| - |A.B|.  Only pairs
sharing at least one bound edge are candidates; pairs with nothing in
common (outer products) are considered only once no adjacent pair is left,
which happens exactly when the view being contracted is disconnected.

The randomized variant reruns the pass several times with each pair score
multiplied by log-normal noise, and keeps the sample with the smallest
serial cost.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .costs import dims_product
from .network import TensorNetwork
from .tree import ContractionTree, leaf_legs


@dataclass
class GreedyConfig:
    """Settings for the randomized greedy search.

    ``noise_scale`` is the log-standard-deviation of the multiplicative
    score noise; 0 makes every sample identical to the deterministic pass.
    """

    objective: str = "mem-reduction"
    samples: int = 32
    noise_scale: float = 0.3
    rng_seed: int = 0

    def __post_init__(self):
        if self.objective != "mem-reduction":
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be >= 0")


def _sample_rng(seed, index):
    entropy = seed & ((1 << 128) - 1)
    return np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=(index,)))


class _Forest:
    """Mutable piece set for one greedy pass.

    Pieces are immutable once created: a merge retires both operands and
    appends a fresh piece, so a heap entry stays valid exactly while both
    of its pieces are alive.
    """

    def __init__(self, net, pieces):
        self.net = net
        self.legs = []
        self.nested = []
        self.rep = []
        self.size = []
        self.alive = []
        self.holders = {}
        for key, legs in pieces:
            idx = self._append(legs, key, key)
            for e in legs:
                self.holders.setdefault(e, set()).add(idx)
        self.total_ops = 0.0

    def _append(self, legs, nested, rep):
        idx = len(self.legs)
        self.legs.append(legs)
        self.nested.append(nested)
        self.rep.append(rep)
        self.size.append(dims_product(self.net, legs))
        self.alive.append(True)
        return idx

    def score(self, i, j):
        result = self.legs[i] ^ self.legs[j]
        return self.size[i] + self.size[j] - dims_product(self.net, result)

    def merge(self, i, j):
        """Contract pieces ``i`` and ``j``; returns the new piece index."""
        li, lj = self.legs[i], self.legs[j]
        self.total_ops += dims_product(self.net, li | lj)
        if self.rep[i] <= self.rep[j]:
            nested = [self.nested[i], self.nested[j]]
        else:
            nested = [self.nested[j], self.nested[i]]
        idx = self._append(li ^ lj, nested, min(self.rep[i], self.rep[j]))
        self.alive[i] = False
        self.alive[j] = False
        for e in li | lj:
            hs = self.holders[e]
            hs.discard(i)
            hs.discard(j)
        for e in self.legs[idx]:
            self.holders.setdefault(e, set()).add(idx)
        return idx

    def neighbors(self, idx):
        out = set()
        for e in sorted(self.legs[idx]):
            for h in self.holders.get(e, ()):
                if h != idx:
                    out.add(h)
        return sorted(out)

    def alive_indices(self):
        return [i for i, a in enumerate(self.alive) if a]


def _greedy_pass(net, pieces, rng=None, noise_scale=0.0):
    """One full greedy pass over ``pieces`` (a list of (key, legs)).

    Returns (nested structure over the piece keys, total multiplications).
    """
    if not pieces:
        raise ValueError("nothing to contract")
    forest = _Forest(net, pieces)
    if len(pieces) == 1:
        return forest.nested[0], 0.0

    noisy = rng is not None and noise_scale > 0.0

    def perturbed(score):
        if noisy:
            return score * math.exp(noise_scale * rng.standard_normal())
        return score

    heap = []

    def push(i, j):
        if forest.rep[i] > forest.rep[j]:
            i, j = j, i
        s = perturbed(forest.score(i, j))
        heapq.heappush(heap, (-s, forest.rep[i], forest.rep[j], i, j))

    seeds = set()
    for e in sorted(forest.holders):
        hs = forest.holders[e]
        if len(hs) == 2:
            a, b = sorted(hs)
            seeds.add((a, b))
    for a, b in sorted(seeds):
        push(a, b)

    n_alive = len(pieces)
    while heap and n_alive > 1:
        _, _, _, i, j = heapq.heappop(heap)
        if not (forest.alive[i] and forest.alive[j]):
            continue
        idx = forest.merge(i, j)
        n_alive -= 1
        for nb in forest.neighbors(idx):
            push(idx, nb)

    # Disconnected view: the survivors share no edges, contract by outer
    # products under the same objective.
    while n_alive > 1:
        live = forest.alive_indices()
        live.sort(key=lambda i: forest.rep[i])
        best = None
        for x in range(len(live)):
            for y in range(x + 1, len(live)):
                i, j = live[x], live[y]
                s = perturbed(forest.score(i, j))
                key = (-s, forest.rep[i], forest.rep[j])
                if best is None or key < best[0]:
                    best = (key, i, j)
        _, i, j = best
        forest.merge(i, j)
        n_alive -= 1

    last = forest.alive_indices()[0]
    return forest.nested[last], forest.total_ops


def _view_pieces(net, view):
    if view is None:
        view = net.vertices()
    return [(v, leaf_legs(net, v)) for v in sorted(view)]


def greedy_tree(net, view=None, cfg=None):
    """Deterministic greedy contraction tree over a network or vertex subset.

    Edges leaving the view behave as open legs.  Ties on the objective are
    broken toward the pair with the smallest leaf vertex ids.
    """
    nested, _ = _greedy_pass(net, _view_pieces(net, view))
    return ContractionTree.from_nested(net, nested)


def random_greedy_tree(net, view=None, cfg=None):
    """Best-of-``cfg.samples`` noisy greedy tree, selected by serial cost.

    Sample seeds derive from ``cfg.rng_seed`` and the sample index alone,
    so the sequence of candidate paths is a fixed function of the seed and
    the best-so-far cost is non-increasing in the sample count.
    """
    cfg = cfg or GreedyConfig()
    pieces = _view_pieces(net, view)
    best_nested = None
    best_ops = math.inf
    for s in range(cfg.samples):
        rng = _sample_rng(cfg.rng_seed, s)
        nested, ops = _greedy_pass(net, pieces, rng=rng, noise_scale=cfg.noise_scale)
        if ops < best_ops:
            best_nested, best_ops = nested, ops
    return ContractionTree.from_nested(net, best_nested)


def reduction_network(net, partition_legs):
    """A network of one pseudo-tensor per partition, wired by shared edges.

    Pseudo-vertex ``i`` gets one axis per leg of partition ``i`` (in sorted
    edge order); an original edge appearing in exactly two partitions'
    legs becomes a bond, anything else stays open.
    """
    pseudo = TensorNetwork()
    for legs in partition_legs:
        pseudo.add_tensor([net.edge_dim(e) for e in sorted(legs)])
    holders = {}
    for i, legs in enumerate(partition_legs):
        for a, e in enumerate(sorted(legs)):
            holders.setdefault(e, []).append((i, a))
    for e in sorted(holders):
        ends = holders[e]
        if len(ends) == 2:
            (i, a), (j, b) = ends
            pseudo.bond(i, a, j, b)
        elif len(ends) > 2:
            raise ValueError(f"edge {e} appears in {len(ends)} partitions")
    return pseudo


def reduction_path(net, partition_legs, cfg=None):
    """Fan-in contraction tree over partition result tensors.

    Returns a tree over the pseudo-network of ``reduction_network``; its
    leaf ids are partition indices.  With one partition this is the
    trivial single-node tree.
    """
    pseudo = reduction_network(net, partition_legs)
    if len(partition_legs) <= 2:
        if len(partition_legs) == 1:
            return ContractionTree.single_leaf(pseudo, 0)
        return ContractionTree.from_nested(pseudo, [0, 1])
    return random_greedy_tree(pseudo, cfg=cfg)
