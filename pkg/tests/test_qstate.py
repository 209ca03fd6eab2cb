import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import random_state
from vqpl.errors import CapacityExceeded, DuplicateTarget, IndexOutOfRange
from vqpl.gates import GATE_NAMES, custom_gate, dagger, gate
from vqpl.qstate import (
    StateVector, alloc_qubit, apply_unitary, fidelity, measure, permute_qubits,
    relink_after_removal,
)

R2 = 1 / math.sqrt(2)


def close(s, amps, tol=1e-12):
    return np.max(np.abs(s.amps - np.asarray(amps, dtype=complex))) <= tol


def dense_oracle(n, targets, u):
    """Full 2^n matrix of ``u`` on ``targets``, built entry by entry."""
    k = len(targets)
    dim = 2 ** n
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
        sub_in = sum(bits[t - 1] << (k - 1 - i) for i, t in enumerate(targets))
        for sub_out in range(2 ** k):
            new = list(bits)
            for i, t in enumerate(targets):
                new[t - 1] = (sub_out >> (k - 1 - i)) & 1
            row = sum(b << (n - 1 - q) for q, b in enumerate(new))
            out[row, col] += u[sub_out, sub_in]
    return out


# ---------------------------------------------------------------- unitaries

def test_x_flips_zero():
    assert close(apply_unitary(StateVector.basis("0"), [1], gate("X")), [0, 1])


def test_hadamard_on_zero():
    assert close(apply_unitary(StateVector.basis("0"), [1], gate("H")), [R2, R2])


def test_three_t_gates_on_ones():
    s = StateVector.basis("111")
    for i in (1, 2, 3):
        s = apply_unitary(s, [i], gate("T"))
    want = np.zeros(8, dtype=complex)
    want[7] = np.exp(1j * 3 * np.pi / 4)
    assert close(s, want)


def test_cnot_target_order_matters():
    s = StateVector.basis("10")
    assert close(apply_unitary(s, [1, 2], gate("CNOT")), StateVector.basis("11").amps)
    assert close(apply_unitary(s, [2, 1], gate("CNOT")), s.amps)


@pytest.mark.parametrize("targets", [[1], [3], [2, 4], [4, 1], [3, 1, 2]])
def test_unitary_matches_dense_oracle(targets):
    rng = np.random.default_rng(len(targets) * 10 + targets[0])
    s = random_state(4, rng)
    k = len(targets)
    u = np.linalg.qr(rng.normal(size=(2 ** k, 2 ** k)) + 1j * rng.normal(size=(2 ** k, 2 ** k)))[0]
    got = apply_unitary(s, targets, custom_gate(u))
    assert close(got, dense_oracle(4, targets, u) @ s.amps, 1e-12)


@pytest.mark.parametrize("targets,err", [([0], IndexOutOfRange), ([3], IndexOutOfRange),
                                         ([1, 1], DuplicateTarget)])
def test_bad_targets(targets, err):
    g = gate("CNOT") if len(targets) == 2 else gate("H")
    with pytest.raises(err):
        apply_unitary(StateVector.basis("00"), targets, g)


def test_arity_must_match_targets():
    with pytest.raises(IndexOutOfRange):
        apply_unitary(StateVector.basis("00"), [1], gate("CNOT"))


FIXED = [g for g in GATE_NAMES if g not in ("CUSTOM", "RX", "RY", "RZ", "PHASE")]


def test_norm_preserved_over_many_trials():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        g = gate(FIXED[rng.integers(len(FIXED))]) if rng.random() < 0.7 else \
            gate(["RX", "RY", "RZ", "PHASE"][rng.integers(4)], float(rng.uniform(-7, 7)))
        if g.arity > n:
            continue
        targets = list(rng.permutation(n)[:g.arity] + 1)
        s = apply_unitary(random_state(n, rng), targets, g)
        assert s.is_normalized(1e-9)


@given(st.integers(0, 2 ** 31), st.sampled_from(FIXED))
def test_dagger_undoes_gate(seed, name):
    rng = np.random.default_rng(seed)
    g = gate(name)
    n = g.arity + 1
    targets = list(rng.permutation(n)[:g.arity] + 1)
    s = random_state(n, rng)
    back = apply_unitary(apply_unitary(s, targets, g), targets, dagger(g))
    assert close(back, s.amps, 1e-9)


# ---------------------------------------------------------------- allocation

def test_alloc_on_scalar():
    s, i = alloc_qubit(StateVector.scalar(), 0)
    assert i == 1 and close(s, [1, 0])


def test_alloc_one_on_one():
    s, i = alloc_qubit(StateVector.basis("1"), 1)
    assert i == 2 and close(s, StateVector.basis("11").amps)


def test_alloc_after_plus():
    s, i = alloc_qubit(StateVector([R2, R2]), 0)
    assert i == 2 and close(s, [R2, 0, R2, 0])


def test_alloc_capacity():
    s = StateVector.basis("000")
    with pytest.raises(CapacityExceeded):
        alloc_qubit(s, 0, max_qubits=3)


# ---------------------------------------------------------------- measurement

def test_measure_plus():
    bs = measure(StateVector([R2, R2]), 1)
    assert [(round(b.prob, 12), b.outcome) for b in bs] == [(0.5, 0), (0.5, 1)]
    assert all(b.state.num_qubits == 0 for b in bs)


def test_measure_deterministic_drops_zero_branch():
    bs = measure(StateVector.basis("0"), 1)
    assert len(bs) == 1 and bs[0].outcome == 0 and bs[0].prob == 1.0


def test_measure_correlated_pair():
    s = StateVector([0.6, 0, 0, 0.8])
    b0, b1 = measure(s, 1)
    assert abs(b0.prob - 0.36) <= 1e-12 and abs(b1.prob - 0.64) <= 1e-12
    assert close(b0.state, [1, 0]) and close(b1.state, [0, 1])


def test_measure_middle_qubit_removes_it():
    # |0>|+>|1>: measuring qubit 2 leaves |01>
    s = StateVector(np.kron(np.kron([1, 0], [R2, R2]), [0, 1]))
    for b in measure(s, 2):
        assert close(b.state, StateVector.basis("01").amps)


@given(st.integers(0, 2 ** 31), st.integers(1, 5))
def test_measurement_complete(seed, n):
    rng = np.random.default_rng(seed)
    s = random_state(n, rng)
    j = int(rng.integers(1, n + 1))
    bs = measure(s, j)
    assert abs(sum(b.prob for b in bs) - 1) <= 1e-12
    for b in bs:
        assert b.state.is_normalized() and b.state.num_qubits == n - 1


@given(st.integers(0, 2 ** 31), st.integers(0, 4), st.sampled_from([0, 1]))
def test_measure_after_alloc_returns_the_bit(seed, n, bit):
    rng = np.random.default_rng(seed)
    s = random_state(n, rng) if n else StateVector.scalar()
    t, j = alloc_qubit(s, bit)
    (b,) = measure(t, j)
    assert b.outcome == bit and b.prob == 1.0
    assert fidelity(b.state, s) >= 1 - 1e-12


def test_measure_matches_projector_oracle():
    rng = np.random.default_rng(3)
    s = random_state(3, rng)
    for j in (1, 2, 3):
        for b in measure(s, j):
            proj = np.diag([1.0 if ((i >> (3 - j)) & 1) == b.outcome else 0.0 for i in range(8)])
            assert abs(b.prob - np.vdot(s.amps, proj @ s.amps).real) <= 1e-12


# ---------------------------------------------------------------- linking and layout

@pytest.mark.parametrize("link,removed,want", [
    ({"x": 1, "y": 3}, 2, {"x": 1, "y": 2}),
    ({"x": 1}, 2, {"x": 1}),
    ({"x": 3, "y": 1}, 2, {"x": 2, "y": 1}),
])
def test_relink(link, removed, want):
    assert relink_after_removal(link, removed) == want


def test_permute_qubits_moves_factors():
    s = StateVector.basis("100")
    assert permute_qubits(s, [2, 3, 1]) == StateVector.basis("001")
    with pytest.raises(IndexOutOfRange):
        permute_qubits(s, [1, 1, 2])


def test_fixture_round_trip():
    s = random_state(2, np.random.default_rng(1))
    data = json.loads(json.dumps(s.to_fixture()))
    assert StateVector.from_fixture(data) == s


def test_non_power_of_two_rejected():
    with pytest.raises(ValueError):
        StateVector([1, 0, 0])


def test_states_are_immutable():
    s = StateVector.basis("0")
    with pytest.raises(ValueError):
        s.amps[0] = 2
