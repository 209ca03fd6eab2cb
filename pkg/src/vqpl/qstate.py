"""Pure-state simulation: statevectors, unitary application on linked qubits,
allocation and destructive Born-rule measurement.

Qubit indices are 1-based and qubit 1 is the most significant tensor factor,
so appending a qubit places it at index ``n + 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityExceeded, DuplicateTarget, IndexOutOfRange

DEFAULT_MAX_QUBITS = 20
NORM_TOL = 1e-9
PRUNE_TOL = 1e-15


class StateVector:
    """Immutable normalized vector in C^(2^n)."""

    __slots__ = ("amps", "num_qubits")

    def __init__(self, amps):
        arr = np.array(amps, dtype=np.complex128).reshape(-1)
        n = arr.size.bit_length() - 1
        if arr.size == 0 or 2 ** n != arr.size:
            raise ValueError(f"amplitude vector of length {arr.size} is not a power of two")
        arr.setflags(write=False)
        self.amps = arr
        self.num_qubits = n

    @classmethod
    def scalar(cls):
        return cls([1.0])

    @classmethod
    def basis(cls, bits):
        """``basis("101")`` is |101>."""
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2) if bits else 0] = 1.0
        return cls(amps)

    def norm(self):
        return float(np.linalg.norm(self.amps))

    def is_normalized(self, tol=NORM_TOL):
        return abs(self.norm() - 1.0) <= tol

    def key(self, decimals=12):
        """Hashable amplitudes rounded to ``decimals`` places (no signed zeros)."""
        r = np.round(self.amps, decimals) + (0.0 + 0.0j)
        return tuple((float(z.real) + 0.0, float(z.imag) + 0.0) for z in r)

    def density(self):
        return np.outer(self.amps, self.amps.conj())

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.num_qubits == other.num_qubits and np.array_equal(self.amps, other.amps)

    def __hash__(self):
        return hash(self.amps.tobytes())

    def __repr__(self):
        if self.num_qubits == 0:
            return "StateVector(1)"
        terms = []
        for i, z in enumerate(self.amps):
            if abs(z) > 1e-12:
                terms.append(f"{complex(z):.4g}|{i:0{self.num_qubits}b}>")
        return "StateVector(" + " + ".join(terms) + ")"

    def to_fixture(self):
        return {"qubits": self.num_qubits,
                "amps": [[float(z.real), float(z.imag)] for z in self.amps]}

    @classmethod
    def from_fixture(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        amps = [complex(re, im) for re, im in data["amps"]]
        s = cls(amps)
        if s.num_qubits != data["qubits"]:
            raise ValueError("fixture qubit count does not match amplitude length")
        return s


def fidelity(a, b):
    """|<a|b>|^2 for pure states of equal size."""
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def _check_targets(n, targets):
    for t in targets:
        if not 1 <= t <= n:
            raise IndexOutOfRange(f"qubit index {t} outside 1..{n}")
    if len(set(targets)) != len(targets):
        raise DuplicateTarget(f"duplicate targets {list(targets)}")


def apply_unitary(s, targets, g):
    """Apply gate ``g`` with its i-th tensor factor acting on qubit ``targets[i]``."""
    targets = list(targets)
    if len(targets) != g.arity:
        raise IndexOutOfRange(f"gate of arity {g.arity} given {len(targets)} targets")
    n = s.num_qubits
    _check_targets(n, targets)
    k = len(targets)
    psi = s.amps.reshape((2,) * n)
    axes = [t - 1 for t in targets]
    front = list(range(k))
    psi = np.moveaxis(psi, axes, front)
    psi = (g.matrix @ psi.reshape(2 ** k, -1)).reshape((2,) * n)
    psi = np.moveaxis(psi, front, axes)
    return StateVector(psi.reshape(-1))


def alloc_qubit(s, bit, max_qubits=DEFAULT_MAX_QUBITS):
    """Return ``(|psi> (x) |bit>, n + 1)``."""
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    n = s.num_qubits
    if n + 1 > max_qubits:
        raise CapacityExceeded(f"allocating qubit {n + 1} exceeds capacity {max_qubits}")
    out = np.zeros(2 * s.amps.size, dtype=complex)
    out[bit::2] = s.amps
    return StateVector(out), n + 1


@dataclass(frozen=True)
class Branch:
    prob: float
    state: StateVector
    outcome: int


def measure(s, j):
    """Measure qubit ``j`` in the computational basis and remove it."""
    n = s.num_qubits
    _check_targets(n, [j])
    a = s.amps.reshape(2 ** (j - 1), 2, 2 ** (n - j))
    parts = [a[:, 0, :].reshape(-1), a[:, 1, :].reshape(-1)]
    weights = [float(np.vdot(p, p).real) for p in parts]
    total = weights[0] + weights[1]
    branches = []
    for bit in (0, 1):
        p = weights[bit] / total
        if p < PRUNE_TOL:
            continue
        branches.append(Branch(p, StateVector(parts[bit] / math.sqrt(weights[bit])), bit))
    return branches


def relink_after_removal(linking, removed):
    """Shift every index above ``removed`` down by one."""
    return {x: (i - 1 if i > removed else i) for x, i in linking.items()}


def permute_qubits(s, order):
    """State whose qubit ``i`` is qubit ``order[i-1]`` of ``s``."""
    n = s.num_qubits
    if sorted(order) != list(range(1, n + 1)):
        raise IndexOutOfRange(f"{order} is not a permutation of 1..{n}")
    if n == 0:
        return s
    psi = s.amps.reshape((2,) * n).transpose([i - 1 for i in order])
    return StateVector(psi.reshape(-1))
