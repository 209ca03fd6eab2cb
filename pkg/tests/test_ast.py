import numpy as np
import pytest
from hypothesis import given, strategies as st

from vqpl.ast import (
    Arrow, CMu, CProd, CSum, CTVar, CUnit, Fold, Inj, Lam, LetTensor, Pair, QFold, QInj, QMu,
    QSum, QTensor, QTVar, QUnit, QVar, Qbit, Star, Tensor, Unit, Var, alpha_equal, bit_type,
    free_qvars, free_type_vars, is_observable, obs_translate_type, obs_translate_value,
    obs_untranslate_value, subst_c, term_key, term_subst, type_subst, types_equal, unfold_type,
)
from vqpl.errors import InvalidGate, NotObservable
from vqpl.gates import GATE_NAMES, custom_gate, dagger, gate

QNAT = QMu("X", QSum(QUnit(), QTVar("X")))
NAT = CMu("X", CSum(CUnit(), CTVar("X")))


# ---------------------------------------------------------------- observable translation

def test_translate_bit():
    assert obs_translate_type(bit_type()) == CSum(CUnit(), CUnit())


def test_translate_unit():
    assert obs_translate_type(QUnit()) == CUnit()


def test_translate_mu():
    assert obs_translate_type(QNAT) == NAT


@pytest.mark.parametrize("t", [Qbit(), QTensor(QUnit(), Qbit()), QTVar("X")])
def test_translate_rejects(t):
    with pytest.raises(NotObservable):
        obs_translate_type(t)


def test_translate_value_examples():
    assert obs_translate_value(QInj(1, Star(), bit_type())) == Inj(1, Unit(), obs_translate_type(bit_type()))
    assert obs_translate_value(Star()) == Unit()
    v = QFold(QInj(2, Star(), unfold_type(QNAT)), QNAT)
    assert obs_translate_value(v) == Fold(Inj(2, Unit(), unfold_type(NAT)), NAT)


def test_translate_value_rejects_variables():
    with pytest.raises(NotObservable):
        obs_translate_value(QVar("x"))


def obs_values(depth):
    """Closed observable quantum values paired with their types."""
    leaf = st.just((Star(), QUnit()))
    if depth == 0:
        return leaf

    def inj(pair, i, other):
        v, t = pair
        ty = QSum(t, other) if i == 1 else QSum(other, t)
        return QInj(i, v, ty), ty

    sub = obs_values(depth - 1)
    return st.one_of(
        leaf,
        st.builds(lambda p, i, o: inj(p, i, o), sub, st.sampled_from([1, 2]),
                  st.sampled_from([QUnit(), bit_type()])),
        st.builds(lambda a, b: (Tensor(a[0], b[0]), QTensor(a[1], b[1])), sub, sub),
    )


@given(obs_values(6))
def test_translation_round_trip(pair):
    v, _ = pair
    assert obs_untranslate_value(obs_translate_value(v)) == v


@given(obs_values(5))
def test_translation_commutes_with_typing(pair):
    from vqpl.typecheck import check_classical, check_quantum
    v, t = pair
    assert types_equal(check_classical({}, obs_translate_value(v)), obs_translate_type(t))
    assert types_equal(check_quantum({}, {}, v), t)


def test_observability_predicate():
    assert is_observable(QNAT)
    assert not is_observable(QTensor(Qbit(), QUnit()))
    assert not is_observable(Arrow(CUnit(), CUnit()))


# ---------------------------------------------------------------- substitution

def test_type_subst_unfolds_nat():
    assert type_subst(NAT.body, "X", NAT) == CSum(CUnit(), NAT)


def test_type_subst_variable():
    r = CProd(CUnit(), CUnit())
    assert type_subst(CTVar("X"), "X", r) == r


def test_type_subst_avoids_capture():
    body = CMu("Y", CSum(CTVar("X"), CTVar("Y")))
    out = type_subst(body, "X", CTVar("Y"))
    assert free_type_vars(out) == {"Y"}
    assert out.binder != "Y"


def test_term_subst_capture_avoiding():
    lam = Lam("y", CUnit(), Var("x"))
    out = term_subst(lam, "x", Var("y"))
    assert isinstance(out, Lam) and out.var != "y"
    assert out.body == Var("y")


def test_term_subst_value():
    lam = Lam("y", CUnit(), Var("x"))
    assert term_subst(lam, "x", Unit()) == Lam("y", CUnit(), Unit())


def test_subst_respects_shadowing():
    lam = Lam("x", CUnit(), Var("x"))
    assert subst_c(lam, {"x": Unit()}) == lam


# ---------------------------------------------------------------- free variables and keys

def test_free_qvars_examples():
    assert free_qvars(Tensor(QVar("x"), QVar("y"))) == ["x", "y"]
    assert free_qvars(LetTensor("x", "y", QVar("z"), Tensor(QVar("x"), QVar("y")))) == ["z"]
    assert free_qvars(Star()) == []


def test_free_qvars_first_occurrence_order():
    assert free_qvars(Tensor(QVar("b"), Tensor(QVar("a"), QVar("c")))) == ["b", "a", "c"]


def test_alpha_equivalent_lambdas_share_keys():
    a = Lam("x", CUnit(), Var("x"))
    b = Lam("z", CUnit(), Var("z"))
    assert alpha_equal(a, b)
    assert term_key(a) != term_key(Lam("x", CUnit(), Unit()))


def test_spans_excluded_from_equality():
    from vqpl.ast import Span
    assert Pair(Unit(span=Span(0, 2)), Unit()) == Pair(Unit(), Unit(span=Span(5, 7)))


# ---------------------------------------------------------------- gates

@pytest.mark.parametrize("name", [n for n in GATE_NAMES if n not in ("CUSTOM", "RX", "RY", "RZ", "PHASE")])
def test_fixed_gates_unitary(name):
    g = gate(name)
    u = g.matrix
    assert np.max(np.abs(u @ u.conj().T - np.eye(2 ** g.arity))) <= 1e-12


@given(st.sampled_from(["RX", "RY", "RZ", "PHASE"]), st.floats(-10, 10))
def test_parametric_gates_unitary(name, theta):
    u = gate(name, theta).matrix
    assert np.max(np.abs(u @ u.conj().T - np.eye(2))) <= 1e-9


def test_gate_arities():
    assert gate("H").arity == 1
    assert gate("CNOT").arity == 2
    assert custom_gate(np.eye(8)).arity == 3


@pytest.mark.parametrize("m", [[[1, 1], [0, 1]], [[1]], np.eye(3), [[1, 0], [0, 1], [0, 0]]])
def test_custom_gate_rejects(m):
    with pytest.raises(InvalidGate):
        custom_gate(m)


def test_gate_parameter_errors():
    with pytest.raises(InvalidGate):
        gate("H", 1.0)
    with pytest.raises(InvalidGate):
        gate("RY")
    with pytest.raises(InvalidGate):
        gate("FOO")


def test_dagger_inverts():
    g = gate("T")
    assert np.allclose(dagger(g).matrix @ g.matrix, np.eye(2))
