import pytest
from hypothesis import given, strategies as st

from vqpl.ast import CUnit, Lam, QInj, Star, Unit, Var, bit_type, obs_translate_value
from vqpl.dist import SubDist, convex_sum, dirac, halt, pushforward, total_variation
from vqpl.errors import WeightOverflow

LABELS = "abcdefgh"


def probs(d):
    return dict(d.key_items())


# ---------------------------------------------------------------- examples

def test_convex_unit_law():
    d = SubDist({"a": 0.3, "b": 0.2})
    assert probs(convex_sum([1.0], [d])) == probs(d)


def test_convex_coin_shape():
    out = convex_sum([0.5, 0.5], [dirac("a"), dirac("b")])
    assert probs(out) == {"a": 0.5, "b": 0.5}


def test_convex_idempotent():
    assert probs(convex_sum([0.5, 0.5], [dirac("a"), dirac("a")])) == {"a": 1.0}


def test_convex_rejects_excess_weight():
    with pytest.raises(WeightOverflow):
        convex_sum([0.7, 0.4], [dirac("a"), dirac("b")])
    with pytest.raises(WeightOverflow):
        convex_sum([-0.1], [dirac("a")])


def test_convex_length_mismatch():
    with pytest.raises(ValueError):
        convex_sum([0.5], [])


def test_halt_of_coin():
    assert halt(SubDist({"ff": 0.5, "tt": 0.5})) == 1.0


def test_dirac_unit():
    d = dirac(Unit())
    assert d[Unit()] == 1.0 and len(d) == 1


def test_pushforward_translation():
    v = QInj(1, Star(), bit_type())
    out = pushforward(obs_translate_value, SubDist([(v, 0.3)]))
    assert out[obs_translate_value(v)] == 0.3


@pytest.mark.parametrize("d1,d2,want", [
    ({"a": 0.5, "b": 0.5}, {"a": 0.5, "b": 0.5}, 0.0),
    ({"a": 1.0}, {"b": 1.0}, 1.0),
    ({"a": 0.5, "b": 0.5}, {"a": 0.4, "b": 0.6}, 0.1),
])
def test_total_variation_examples(d1, d2, want):
    assert abs(total_variation(SubDist(d1), SubDist(d2)) - want) <= 1e-12


def test_alpha_variants_share_a_key():
    d = SubDist()
    d.add(Lam("x", CUnit(), Var("x")), 0.25)
    d.add(Lam("y", CUnit(), Var("y")), 0.25)
    assert len(d) == 1 and d[Lam("z", CUnit(), Var("z"))] == 0.5


def test_zero_mass_dropped():
    d = SubDist({"a": 0.0})
    assert len(d) == 0 and d.total() == 0.0


def test_outcomes_sorted_and_serializable():
    d = SubDist({"tt": 0.5, "ff": 0.5})
    assert [o["value"] for o in d.outcomes()] == ["ff", "tt"]
    assert d.to_json() == '[{"prob": 0.5, "value": "ff"}, {"prob": 0.5, "value": "tt"}]'


# ---------------------------------------------------------------- properties

def subdists(total=1.0):
    def build(ws, labels):
        s = sum(ws)
        scale = total / s if s > 0 else 0.0
        return SubDist({k: w * scale for k, w in zip(labels, ws)})
    return st.lists(st.integers(0, 1000), min_size=1, max_size=len(LABELS)).flatmap(
        lambda ws: st.permutations(LABELS).map(lambda ls: build(ws, ls[:len(ws)])))


def weights(n):
    return st.lists(st.integers(0, 1000), min_size=n, max_size=n).map(
        lambda ws: [w / max(sum(ws), 1000) for w in ws])


def close(a, b, tol=1e-12):
    pa, pb = probs(a), probs(b)
    return all(abs(pa.get(k, 0.0) - pb.get(k, 0.0)) <= tol for k in set(pa) | set(pb))


@given(weights(4), st.lists(subdists(), min_size=4, max_size=4), st.permutations(range(4)))
def test_convex_permutation_invariant(ws, ds, perm):
    a = convex_sum(ws, ds)
    b = convex_sum([ws[i] for i in perm], [ds[i] for i in perm])
    assert close(a, b)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), subdists(), subdists(), subdists())
def test_convex_nested_associativity(r, s, x, y, z):
    # x +_r (y +_s z) == (x +_{r'} y) +_{s'} z with the barycentric reweighting
    lhs = convex_sum([r, 1 - r], [x, convex_sum([s, 1 - s], [y, z])])
    outer = r + (1 - r) * s
    inner = r / outer if outer > 0 else 0.0
    rhs = convex_sum([outer, 1 - outer], [convex_sum([inner, 1 - inner], [x, y]), z])
    assert close(lhs, rhs, 1e-12)


@given(subdists(0.8), st.sampled_from([str.upper, lambda k: "x", lambda k: k in "abc"]))
def test_pushforward_preserves_mass(d, f):
    assert abs(pushforward(f, d).total() - d.total()) <= 1e-12


@given(subdists(), subdists())
def test_tv_symmetric_and_bounded(a, b):
    t = total_variation(a, b)
    assert abs(t - total_variation(b, a)) <= 1e-15
    assert 0.0 <= t <= 1.0 + 1e-12
    assert total_variation(a, a) == 0.0


@given(subdists(), subdists(), subdists())
def test_tv_triangle_inequality(a, b, c):
    assert total_variation(a, c) <= total_variation(a, b) + total_variation(b, c) + 1e-12


@given(weights(3), st.lists(subdists(), min_size=3, max_size=3))
def test_convex_total_is_weighted_total(ws, ds):
    out = convex_sum(ws, ds)
    assert abs(out.total() - sum(w * d.total() for w, d in zip(ws, ds))) <= 1e-12
    assert out.total() <= 1 + 1e-12
