"""Cost metrics for contraction trees: memory, serial, parallel, distributed.

All metrics derive from one quantity per internal tree node: the number of
scalar multiplications of that pairwise contraction, which equals the
product of the dimensions over the union of the children's legs.  Values
are accumulated in linear 64-bit floats; per-node products are exact
integers as long as they stay below 2**53, and anything past 2**300 is
clamped and flagged rather than allowed to overflow.

Reductions over edge sets always iterate in sorted edge order so results
do not depend on how a particular set object was assembled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

LOG2_SATURATION = 300.0
_SATURATION_VALUE = 2.0 ** LOG2_SATURATION


@dataclass
class CostConfig:
    """Knobs for the distributed metric.

    ``comm_alpha`` and ``comm_beta`` give the per-message latency and the
    per-entry transfer cost of shipping an intermediate between nodes; both
    default to 0, which ignores communication.  ``intra_node`` picks the
    metric used inside one partition: "serial" or "par".
    """

    comm_alpha: float = 0.0
    comm_beta: float = 0.0
    intra_node: str = "serial"

    def __post_init__(self):
        if self.intra_node not in ("serial", "par"):
            raise ValueError(f"intra_node must be 'serial' or 'par', got {self.intra_node!r}")


@dataclass
class PartitionCost:
    index: int
    local: float
    fanin: float


@dataclass
class CostReport:
    mem: float
    con_serial: float
    con_par: float
    con_dist: float
    mem_log2: float
    con_serial_log2: float
    con_par_log2: float
    con_dist_log2: float
    per_partition: list = field(default_factory=list)
    saturated: bool = False

    def to_dict(self):
        def num(x):
            return x if math.isfinite(x) else None

        return {
            "mem": num(self.mem),
            "con_serial": num(self.con_serial),
            "con_par": num(self.con_par),
            "con_dist": num(self.con_dist),
            "mem_log2": num(self.mem_log2),
            "con_serial_log2": num(self.con_serial_log2),
            "con_par_log2": num(self.con_par_log2),
            "con_dist_log2": num(self.con_dist_log2),
            "per_partition": [
                {"index": p.index, "local": num(p.local), "fanin": num(p.fanin)}
                for p in self.per_partition
            ],
            "saturated": self.saturated,
        }


def dims_product(net, legs):
    """Product of edge dimensions over a leg set, clamped at 2**300."""
    value = 1.0
    for e in sorted(legs):
        value *= net.edge_dim(e)
        if value > _SATURATION_VALUE:
            return _SATURATION_VALUE
    return value


def _log2_dims(net, legs):
    return sum(math.log2(net.edge_dim(e)) for e in sorted(legs))


def legs_size(tree, t):
    """Entry count of the intermediate tensor at node ``t``."""
    return dims_product(tree.network, tree.legs(t))


def vertex_congestion(tree, t):
    """log2 of the multiplication count of the contraction at internal ``t``."""
    ch = tree.children(t)
    if ch is None:
        raise ValueError(f"node {t} is a leaf; congestion is defined on contractions")
    union = tree.legs(ch[0]) | tree.legs(ch[1])
    return _log2_dims(tree.network, union)


def node_ops(tree, t):
    """Multiplication count of the contraction at internal node ``t``.

    Computed as the exact product over the union of the children's legs
    (not via 2**vc, which would round for non-power-of-two dimensions).
    Memoized on the tree; trees are not edited after construction.
    """
    memo = tree.scratch.setdefault("ops", {})
    val = memo.get(t)
    if val is None:
        ch = tree.children(t)
        if ch is None:
            raise ValueError(f"node {t} is a leaf; ops are defined on contractions")
        union = tree.legs(ch[0]) | tree.legs(ch[1])
        val = dims_product(tree.network, union)
        memo[t] = val
    return val


def con_serial(tree, root=None):
    """Total multiplications when the subtree under ``root`` runs serially."""
    total = 0.0
    for t in tree.postorder(root):
        if tree.children(t) is not None:
            total += node_ops(tree, t)
    return total


def con_par(tree, root=None):
    """Critical-path multiplications with unlimited pairwise parallelism.

    The maximum over leaves of the summed contraction costs along the
    leaf-to-root path, the leaf itself excluded.
    """
    if root is None:
        root = tree.root
    top_parent = tree.parent(root)
    best = 0.0
    for t in tree.postorder(root):
        if tree.children(t) is not None:
            continue
        total = 0.0
        a = tree.parent(t)
        while a is not top_parent:
            total += node_ops(tree, a)
            a = tree.parent(a)
        if total > best:
            best = total
    return best


def mem_cost(tree, root=None):
    """Peak buffer entries: the worst (result + both operands) over contractions.

    A single-leaf tree costs its leaf tensor's entry count.
    """
    if root is None:
        root = tree.root
    if tree.children(root) is None:
        return legs_size(tree, root)
    peak = 0.0
    for t in tree.postorder(root):
        ch = tree.children(t)
        if ch is None:
            continue
        total = legs_size(tree, t) + legs_size(tree, ch[0]) + legs_size(tree, ch[1])
        if total > peak:
            peak = total
    return peak


def comm_cost(tree, t, cfg=None):
    """Cost of shipping the intermediate at ``t`` to another node."""
    cfg = cfg or CostConfig()
    return cfg.comm_alpha + cfg.comm_beta * legs_size(tree, t)


def _intra(cfg):
    return con_par if cfg.intra_node == "par" else con_serial


def distributed_breakdown(tree, blocks, cfg=None, subtree_roots=None, local_costs=None):
    """Per-partition local and fan-in costs for a tree that accepts ``blocks``.

    Each partition pays its own subtree (serial or critical-path, per
    ``cfg.intra_node``) and then every contraction on the path from its
    subtree root to the tree root, each with the cheaper child's transfer
    cost added.  ``local_costs`` may supply precomputed subtree costs.
    """
    cfg = cfg or CostConfig()
    if subtree_roots is None:
        subtree_roots = tree.subtree_roots(blocks)
        if subtree_roots is None:
            raise ValueError("tree does not accept the partitioning")
    intra = _intra(cfg)
    parts = []
    for idx, r in enumerate(subtree_roots):
        local = local_costs[idx] if local_costs is not None else intra(tree, r)
        fanin = 0.0
        a = tree.parent(r)
        while a is not None:
            ch = tree.children(a)
            send = min(comm_cost(tree, ch[0], cfg), comm_cost(tree, ch[1], cfg))
            fanin += node_ops(tree, a) + send
            a = tree.parent(a)
        parts.append(PartitionCost(idx, local, fanin))
    return parts


def con_dist(tree, blocks, cfg=None, subtree_roots=None, local_costs=None):
    """Distributed-execution cost: the slowest partition's local plus fan-in work."""
    parts = distributed_breakdown(tree, blocks, cfg, subtree_roots, local_costs)
    best = 0.0
    for p in parts:
        total = p.local + p.fanin
        if total > best:
            best = total
    return best


def is_saturated(tree):
    """True when any node size or contraction in the tree hit the 2**300 clamp."""
    for t in tree.postorder():
        if _log2_dims(tree.network, tree.legs(t)) > LOG2_SATURATION:
            return True
        if tree.children(t) is not None and vertex_congestion(tree, t) > LOG2_SATURATION:
            return True
    return False


def _log2_or_ninf(x):
    return math.log2(x) if x > 0 else float("-inf")


def cost_report(tree, blocks=None, cfg=None, subtree_roots=None, local_costs=None):
    """All four metrics for one tree, optionally under a partitioning.

    Without ``blocks`` the tree is treated as one partition, so the
    distributed figure reduces to the serial one.
    """
    cfg = cfg or CostConfig()
    serial = con_serial(tree)
    par = con_par(tree)
    mem = mem_cost(tree)
    if blocks is None:
        parts = [PartitionCost(0, serial, 0.0)]
        dist = serial
    else:
        parts = distributed_breakdown(tree, blocks, cfg, subtree_roots, local_costs)
        dist = 0.0
        for p in parts:
            total = p.local + p.fanin
            if total > dist:
                dist = total
    return CostReport(
        mem=mem,
        con_serial=serial,
        con_par=par,
        con_dist=dist,
        mem_log2=_log2_or_ninf(mem),
        con_serial_log2=_log2_or_ninf(serial),
        con_par_log2=_log2_or_ninf(par),
        con_dist_log2=_log2_or_ninf(dist),
        per_partition=parts,
        saturated=is_saturated(tree),
    )
