"""Unitary gate specifications with precomputed matrices."""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidGate

UNITARY_TOL = 1e-9

_S2 = 1 / math.sqrt(2)

_FIXED = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def _rx(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _ry(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def _phase(t):
    return np.diag([1, np.exp(1j * t)]).astype(complex)


_PARAMETRIC = {"RX": _rx, "RY": _ry, "RZ": _rz, "PHASE": _phase}

FIXED_GATES = tuple(_FIXED)
PARAMETRIC_GATES = tuple(_PARAMETRIC)
GATE_NAMES = FIXED_GATES + PARAMETRIC_GATES + ("CUSTOM",)


class GateSpec:
    """A named unitary with its matrix; qubit 1 of the gate is the most
    significant tensor factor."""

    __slots__ = ("name", "params", "matrix", "arity")

    def __init__(self, name, params=(), matrix=None):
        if name in _FIXED:
            if params:
                raise InvalidGate(f"gate {name} takes no parameters")
            matrix = _FIXED[name]
        elif name in _PARAMETRIC:
            if len(params) != 1:
                raise InvalidGate(f"gate {name} takes exactly one angle")
            matrix = _PARAMETRIC[name](float(params[0]))
        elif name == "CUSTOM":
            if matrix is None:
                raise InvalidGate("CUSTOM gate needs a matrix")
            matrix = np.array(matrix, dtype=complex)
        else:
            raise InvalidGate(f"unknown gate {name}")
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InvalidGate("gate matrix must be square")
        side = matrix.shape[0]
        arity = side.bit_length() - 1
        if side < 2 or 2 ** arity != side:
            raise InvalidGate(f"gate side {side} is not 2^n with n >= 1")
        err = np.max(np.abs(matrix @ matrix.conj().T - np.eye(side)))
        if err > UNITARY_TOL:
            raise InvalidGate(f"gate {name} is not unitary (error {err:.3g})")
        matrix = matrix.copy()
        matrix.setflags(write=False)
        self.name = name
        self.params = tuple(float(p) for p in params)
        self.matrix = matrix
        self.arity = arity

    def __eq__(self, other):
        if not isinstance(other, GateSpec):
            return NotImplemented
        if self.name != other.name or self.params != other.params:
            return False
        return self.name != "CUSTOM" or np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        if self.name == "CUSTOM":
            return hash((self.name, self.matrix.tobytes()))
        return hash((self.name, self.params))

    def key(self):
        if self.name == "CUSTOM":
            return ("CUSTOM", tuple((complex(z).real, complex(z).imag) for z in self.matrix.flat))
        return (self.name, self.params)

    def __repr__(self):
        if self.name == "CUSTOM":
            return f"GateSpec(CUSTOM, arity={self.arity})"
        if self.params:
            return f"GateSpec({self.name}, {self.params})"
        return f"GateSpec({self.name})"


def gate(name, *params):
    return GateSpec(name, params)


def custom_gate(matrix):
    return GateSpec("CUSTOM", (), matrix)


def dagger(g):
    """The inverse gate as a CUSTOM spec."""
    return custom_gate(g.matrix.conj().T)
