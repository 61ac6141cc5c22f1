"""Generated benchmark circuits: GHZ, ring graph states, QFT, random layers."""

from __future__ import annotations

import math

import numpy as np

from .circuits import Circuit, make_gate


def ghz_circuit(n):
    """H on qubit 0 followed by a CX chain; 2n + n tensors as a network."""
    gates = [make_gate("H", [0])]
    for q in range(n - 1):
        gates.append(make_gate("CX", [q, q + 1]))
    return Circuit(n, gates)


def graph_state_circuit(n):
    """Ring graph state: H everywhere, then CZ along the cycle."""
    gates = [make_gate("H", [q]) for q in range(n)]
    edges = [(q, (q + 1) % n) for q in range(n)] if n > 2 else [(0, 1)]
    for u, v in edges:
        gates.append(make_gate("CZ", [u, v]))
    return Circuit(n, gates)


def _cp_matrix(theta):
    return np.diag([1.0, 1.0, 1.0, np.exp(1j * theta)]).astype(np.complex128)


def qft_circuit(n):
    """Textbook quantum Fourier transform with controlled-phase cascades."""
    gates = []
    for i in range(n):
        gates.append(make_gate("H", [i]))
        for j in range(i + 1, n):
            theta = math.pi / (2 ** (j - i))
            gates.append(make_gate("cp", [j, i], params=(theta,), matrix=_cp_matrix(theta)))
    for i in range(n // 2):
        gates.append(make_gate("SWAP", [i, n - 1 - i]))
    return Circuit(n, gates)


def random_circuit(n, depth, seed=0):
    """Layers of random single-qubit rotations and CX pairs.

    Each layer rotates every qubit, then entangles a random disjoint
    pairing.  If the accumulated coupling graph leaves qubits in separate
    groups, bridging CX gates are appended so the amplitude network comes
    out connected.  Deterministic for a given seed.
    """
    rng = np.random.default_rng(seed & ((1 << 128) - 1))
    gates = []
    coupled = {q: {q} for q in range(n)}

    def union(a, b):
        if coupled[a] is coupled[b]:
            return
        merged = coupled[a] | coupled[b]
        for q in merged:
            coupled[q] = merged

    axes = ["RX", "RY", "RZ"]
    for _ in range(depth):
        for q in range(n):
            gates.append(make_gate(axes[int(rng.integers(3))], [q], params=(float(rng.uniform(0, 2 * math.pi)),)))
        order = list(rng.permutation(n))
        for i in range(0, n - 1, 2):
            a, b = int(order[i]), int(order[i + 1])
            gates.append(make_gate("CX", [a, b]))
            union(a, b)
    reps = sorted({min(group) for group in {id(coupled[q]): coupled[q] for q in range(n)}.values()})
    for a, b in zip(reps, reps[1:]):
        gates.append(make_gate("CX", [a, b]))
    return Circuit(n, gates)


def bundled_suite():
    """The built-in benchmark corpus: named circuits at 4 to 12 qubits."""
    suite = []
    for n in (4, 6, 8, 10, 12):
        suite.append((f"ghz-{n}", ghz_circuit(n)))
    for n in (6, 8, 10):
        suite.append((f"ring-{n}", graph_state_circuit(n)))
    for n in (6, 8):
        suite.append((f"qft-{n}", qft_circuit(n)))
    for i, n in enumerate((6, 8, 10, 12)):
        suite.append((f"rand-{n}", random_circuit(n, depth=3, seed=11 + i)))
    return suite
