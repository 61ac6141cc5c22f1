"""Dense execution of contraction trees, with operation and memory accounting.

The executor walks a tree bottom-up, contracting pairs of complex-double
tensors.  Two kernels are available: explicit index loops, and a permute
then matrix-multiply fast path.  Both perform (and count) exactly
result_entries * shared_dims_product scalar multiplications per
contraction, so the trace's mult_count matches the serial cost metric of
the tree it executed.

Self-loop (trace) edges on a leaf are summed out when the leaf is loaded;
that uses additions only and leaves the planning-level tensor whose legs
the tree reasons about.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .costs import mem_cost, vertex_congestion

DEFAULT_MAX_ENTRIES = 2 ** 28


class ExecutionError(RuntimeError):
    """Missing payloads, malformed operands, or non-finite results."""


class MemoryBudgetError(ExecutionError):
    """The plan's peak buffer requirement exceeds the configured budget."""


def _contract_matmul(s, t, pairs):
    saxes = [p[0] for p in pairs]
    taxes = [p[1] for p in pairs]
    sf = [a for a in range(s.ndim) if a not in set(saxes)]
    tf = [a for a in range(t.ndim) if a not in set(taxes)]
    f = int(np.prod([s.shape[a] for a in sf], dtype=object)) if sf else 1
    g = int(np.prod([s.shape[a] for a in saxes], dtype=object)) if saxes else 1
    h = int(np.prod([t.shape[a] for a in tf], dtype=object)) if tf else 1
    s2 = np.transpose(s, sf + saxes).reshape(f, g)
    t2 = np.transpose(t, taxes + tf).reshape(g, h)
    out = s2 @ t2
    shape = [s.shape[a] for a in sf] + [t.shape[a] for a in tf]
    return out.reshape(shape)


def _contract_loops(s, t, pairs):
    saxes = [p[0] for p in pairs]
    taxes = [p[1] for p in pairs]
    sf = [a for a in range(s.ndim) if a not in set(saxes)]
    tf = [a for a in range(t.ndim) if a not in set(taxes)]
    shared_dims = [s.shape[a] for a in saxes]
    out_shape = [s.shape[a] for a in sf] + [t.shape[a] for a in tf]
    out = np.zeros(out_shape, dtype=np.complex128)
    for out_idx in np.ndindex(*out_shape):
        fi = out_idx[: len(sf)]
        fj = out_idx[len(sf):]
        sidx = [0] * s.ndim
        tidx = [0] * t.ndim
        for a, v in zip(sf, fi):
            sidx[a] = v
        for a, v in zip(tf, fj):
            tidx[a] = v
        acc = 0j
        for sh in np.ndindex(*shared_dims):
            for a, b, v in zip(saxes, taxes, sh):
                sidx[a] = v
                tidx[b] = v
            acc += s[tuple(sidx)] * t[tuple(tidx)]
        out[out_idx] = acc
    return out


_KERNELS = {"matmul": _contract_matmul, "loops": _contract_loops}


def contract_pair(s, t, pairs, kernel="matmul"):
    """Contract two tensors over the given (s_axis, t_axis) pairs.

    The result's axes are s's free axes in their original order followed
    by t's free axes in theirs.  An empty ``pairs`` yields the outer
    product.
    """
    s = np.asarray(s, dtype=np.complex128)
    t = np.asarray(t, dtype=np.complex128)
    seen_s, seen_t = set(), set()
    for a, b in pairs:
        if not (0 <= a < s.ndim and 0 <= b < t.ndim):
            raise ExecutionError(f"axis pair ({a}, {b}) out of range")
        if a in seen_s or b in seen_t:
            raise ExecutionError(f"axis pair ({a}, {b}) repeats an axis")
        seen_s.add(a)
        seen_t.add(b)
        if s.shape[a] != t.shape[b]:
            raise ExecutionError(
                f"dimension mismatch on pair ({a}, {b}): {s.shape[a]} vs {t.shape[b]}"
            )
    if kernel not in _KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}")
    return _KERNELS[kernel](s, t, list(pairs))


@dataclass
class ContractionRecord:
    node: int
    vc: float
    entries: int
    seconds: float


@dataclass
class ExecutionTrace:
    """Result tensor plus per-contraction accounting for one tree walk."""

    result: np.ndarray
    axis_edges: tuple
    mult_count: int
    peak_entries: int
    resident_peak: int
    records: list = field(default_factory=list)

    def scalar(self):
        if self.result.size != 1:
            raise ExecutionError(f"result has {self.result.size} entries, not a scalar")
        return complex(self.result.reshape(()))


def _leaf_tensor(net, v):
    arr = net.payload(v)
    if arr is None:
        raise ExecutionError(f"vertex {v} has no tensor data")
    axes = list(net.axis_edges(v))
    while True:
        loop = None
        for i, e in enumerate(axes):
            j = axes.index(e)
            if j != i:
                loop = (j, i)
                break
        if loop is None:
            break
        a, b = loop
        arr = np.trace(arr, axis1=a, axis2=b)
        axes = [e for i, e in enumerate(axes) if i not in (a, b)]
    return np.asarray(arr, dtype=np.complex128), axes


def execute_plan(net, tree, kernel="matmul", max_entries=DEFAULT_MAX_ENTRIES, inputs=None):
    """Evaluate a contraction tree over materialized tensors.

    ``tree`` may cover the whole network or a vertex subset; edges leaving
    the covered set appear as axes of the result.  ``inputs`` may preset
    tensors for some nodes as (array, axis_edge_ids); their subtrees are
    not descended into.  Plans whose peak buffer need exceeds
    ``max_entries`` are refused before anything is allocated.
    """
    if max_entries is not None and mem_cost(tree) > max_entries:
        raise MemoryBudgetError(
            f"plan needs {mem_cost(tree):.4g} buffer entries, budget is {max_entries}"
        )
    inputs = inputs or {}
    env = {}
    live_total = 0
    mult_count = 0
    peak = 0
    resident = 0
    records = []

    stack = [(tree.root, False)]
    while stack:
        node, expanded = stack.pop()
        if not expanded:
            if node in inputs:
                arr, axes = inputs[node]
                arr = np.asarray(arr, dtype=np.complex128)
                env[node] = (arr, list(axes))
                live_total += arr.size
                resident = max(resident, live_total)
                continue
            ch = tree.children(node)
            if ch is None:
                arr, axes = _leaf_tensor(net, tree.leaf_vertex(node))
                env[node] = (arr, axes)
                live_total += arr.size
                resident = max(resident, live_total)
                continue
            stack.append((node, True))
            stack.append((ch[1], False))
            stack.append((ch[0], False))
            continue

        left, right = tree.children(node)
        larr, lax = env.pop(left)
        rarr, rax = env.pop(right)
        shared = sorted(tree.legs(left) & tree.legs(right))
        pairs = [(lax.index(e), rax.index(e)) for e in shared]
        started = time.perf_counter()
        out = contract_pair(larr, rarr, pairs, kernel=kernel)
        seconds = time.perf_counter() - started
        g = 1
        for e in shared:
            g *= net.edge_dim(e)
        mult_count += out.size * g
        peak = max(peak, out.size + larr.size + rarr.size)
        resident = max(resident, live_total + out.size)
        live_total += out.size - larr.size - rarr.size
        shared_set = set(shared)
        axes = [e for e in lax if e not in shared_set] + [e for e in rax if e not in shared_set]
        env[node] = (out, axes)
        records.append(ContractionRecord(node, vertex_congestion(tree, node), out.size, seconds))

    arr, axes = env[tree.root]
    if not np.all(np.isfinite(arr)):
        raise ExecutionError("contraction produced non-finite values")
    return ExecutionTrace(arr, tuple(axes), mult_count, peak, resident, records)


@dataclass
class EmulationResult:
    """Distributed run emulated on one machine.

    Partitions execute serially and are timed individually; the emulated
    wall time charges each partition its own work plus the fan-in
    contractions on its path to the root, and takes the slowest partition.
    """

    result: np.ndarray
    mult_count: int
    partition_seconds: list
    fanin_seconds: list
    emulated_seconds: float
    serial_seconds: float

    def scalar(self):
        arr = np.asarray(self.result)
        if arr.size != 1:
            raise ExecutionError(f"result has {arr.size} entries, not a scalar")
        return complex(arr.reshape(()))


def execute_distributed_emulation(net, plan, kernel="matmul", max_entries=DEFAULT_MAX_ENTRIES):
    """Run a partitioned plan, timing per-partition and fan-in work separately."""
    locals_ = []
    inputs = {}
    mult_count = 0
    for i, ptree in enumerate(plan.partition_trees):
        started = time.perf_counter()
        trace = execute_plan(net, ptree, kernel=kernel, max_entries=max_entries)
        locals_.append(time.perf_counter() - started)
        mult_count += trace.mult_count
        inputs[plan.part_roots[i]] = (trace.result, trace.axis_edges)
    fan = execute_plan(net, plan.tree, kernel=kernel, max_entries=max_entries, inputs=inputs)
    mult_count += fan.mult_count
    node_seconds = {r.node: r.seconds for r in fan.records}
    fanin = []
    for i, r in enumerate(plan.part_roots):
        total = 0.0
        a = plan.tree.parent(r)
        while a is not None:
            total += node_seconds.get(a, 0.0)
            a = plan.tree.parent(a)
        fanin.append(total)
    emulated = max(l + f for l, f in zip(locals_, fanin))
    serial = sum(locals_) + sum(node_seconds.values())
    return EmulationResult(fan.result, mult_count, locals_, fanin, emulated, serial)
