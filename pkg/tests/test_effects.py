import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effectdual import matrix_core as mc
from effectdual.effects import (
    ClassicalEffect,
    OutcomeSpace,
    QuantumEffect,
    effect_array,
    effect_metric,
    is_effect_module_hom,
    is_orthogonal,
    neg,
    ovee,
    random_effect,
    scalar,
    unit,
    zero,
)
from effectdual.errors import DimensionMismatch, NotOrthogonal, ValidationError

X3 = OutcomeSpace.of_size(3)


def bisection_metric(a, b, iters=60):
    """Smallest r with a <= b + r and b <= a + r, found by bisection on PSD tests."""
    a, b = effect_array(a), effect_array(b)
    if a.ndim == 1:
        a, b = np.diag(a), np.diag(b)
    one = np.eye(a.shape[0])

    def ok(r):
        return np.linalg.eigvalsh(b + r * one - a)[0] >= 0 and np.linalg.eigvalsh(a + r * one - b)[0] >= 0

    lo, hi = 0.0, 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def test_outcome_space_validation():
    assert list(X3) == ["0", "1", "2"]
    assert X3.index("2") == 2
    with pytest.raises(ValidationError):
        OutcomeSpace(())
    with pytest.raises(ValidationError):
        OutcomeSpace(("a", "a"))
    with pytest.raises(KeyError):
        X3.index("9")


def test_classical_effect_range_check():
    with pytest.raises(ValidationError):
        ClassicalEffect(X3, [0.1, 1.2, 0.0])
    with pytest.raises(DimensionMismatch):
        ClassicalEffect(X3, [0.1, 0.2])
    f = ClassicalEffect(X3, [0.0, -1e-12, 1 + 1e-12])
    assert f.values.min() == 0.0 and f.values.max() == 1.0


def test_classical_effect_is_immutable():
    f = ClassicalEffect(X3, [0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        f.values[0] = 0.5


def test_quantum_effect_range_check():
    with pytest.raises(ValidationError):
        QuantumEffect(np.diag([0.5, 1.5]))
    with pytest.raises(ValidationError):
        QuantumEffect(np.array([[0.5, 0.1], [0.0, 0.5]]))
    assert QuantumEffect.identity(3).dim == 3


def test_ovee_with_zero_is_identity():
    f = ClassicalEffect(X3, [0.2, 0.5, 0.9])
    assert np.abs(ovee(f, zero(X3)).values - f.values).max() == 0


def test_ovee_halves_give_unit():
    half = QuantumEffect(0.5 * np.eye(2))
    assert np.abs(ovee(half, half).operator - np.eye(2)).max() == 0


def test_ovee_rejects_non_orthogonal():
    a = QuantumEffect(0.7 * np.eye(2))
    assert not is_orthogonal(a, a)
    with pytest.raises(NotOrthogonal):
        ovee(a, a)


def test_ovee_rejects_mixed_domains():
    with pytest.raises(DimensionMismatch):
        ovee(zero(X3), zero(2))


def test_neg_examples():
    assert np.abs(effect_array(neg(zero(2))) - np.eye(2)).max() == 0
    e = QuantumEffect(np.diag([0.3, 0.8]))
    assert np.abs(neg(e).operator - np.diag([0.7, 0.2])).max() < 1e-15


def test_scalar_examples(rng):
    e = random_effect(3, rng)
    assert np.abs(scalar(1.0, e).operator - e.operator).max() == 0
    assert np.abs(scalar(0.0, e).operator).max() == 0
    assert np.abs(scalar(0.5, QuantumEffect.identity(2)).operator - np.diag([0.5, 0.5])).max() == 0
    with pytest.raises(ValidationError):
        scalar(1.5, e)


def test_metric_examples():
    e = QuantumEffect(np.diag([0.3, 0.6]))
    assert effect_metric(e, e) == 0
    assert effect_metric(unit(2), zero(2)) == 1
    assert effect_metric(unit(X3), zero(X3)) == 1


def test_metric_matches_bisection_oracle(rng):
    for k in range(40):
        dom = X3 if k % 2 else int(rng.integers(1, 5))
        a, b = random_effect(dom, rng), random_effect(dom, rng)
        assert abs(effect_metric(a, b) - bisection_metric(a, b)) < 1e-12


def test_metric_equals_norm_distance(rng):
    for _ in range(20):
        a, b = random_effect(3, rng), random_effect(3, rng)
        assert abs(effect_metric(a, b) - mc.operator_norm_distance(a.operator, b.operator)) < 1e-10


def test_random_effect_is_valid(rng):
    for d in range(1, 6):
        vals = np.linalg.eigvalsh(random_effect(d, rng).operator)
        assert vals[0] >= -1e-12 and vals[-1] <= 1 + 1e-12


def test_hom_identity_passes():
    assert is_effect_module_hom(lambda e: e, 3).ok
    assert is_effect_module_hom(lambda e: e, X3).ok


def test_hom_diagonal_embedding_passes():
    rep = is_effect_module_hom(lambda f: QuantumEffect(np.diag(f.values)), X3)
    assert rep.ok and rep.max_deviation < 1e-12


def test_hom_pointwise_square_fails_with_witness():
    rep = is_effect_module_hom(lambda f: ClassicalEffect(f.space, f.values**2), X3)
    assert not rep.ok
    assert rep.witness is not None
    assert "⊕" in rep.violation


def test_hom_non_unital_fails():
    rep = is_effect_module_hom(lambda f: scalar(0.5, f), X3)
    assert not rep.ok and "h(1)" in rep.violation


domains = st.one_of(st.integers(1, 4), st.integers(1, 6).map(OutcomeSpace.of_size))


@settings(max_examples=80, deadline=None)
@given(dom=domains, seed=st.integers(0, 2**32 - 1))
def test_effect_module_laws(dom, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_effect(dom, rng) for _ in range(3))
    w = rng.dirichlet(np.ones(4))
    x, y, z = scalar(w[0], a), scalar(w[1], b), scalar(w[2], c)
    arr = effect_array
    assert np.abs(arr(ovee(x, y)) - arr(ovee(y, x))).max() < 1e-12
    assert np.abs(arr(ovee(ovee(x, y), z)) - arr(ovee(x, ovee(y, z)))).max() < 1e-12
    assert np.abs(arr(ovee(a, neg(a))) - arr(unit(dom))).max() < 1e-12
    assert np.abs(arr(neg(neg(a))) - arr(a)).max() < 1e-12
    r, s = rng.uniform(size=2)
    assert np.abs(arr(scalar(r, ovee(x, y))) - arr(ovee(scalar(r, x), scalar(r, y)))).max() < 1e-12
    assert np.abs(arr(scalar(r * s, a)) - arr(scalar(r, scalar(s, a)))).max() < 1e-12
    assert np.abs(arr(scalar(w[0] + w[1], a)) - arr(ovee(scalar(w[0], a), scalar(w[1], a)))).max() < 1e-12


@settings(max_examples=60, deadline=None)
@given(dom=domains, seed=st.integers(0, 2**32 - 1))
def test_metric_is_a_metric(dom, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_effect(dom, rng) for _ in range(3))
    assert effect_metric(a, a) < 1e-12
    assert abs(effect_metric(a, b) - effect_metric(b, a)) < 1e-15
    assert effect_metric(a, c) <= effect_metric(a, b) + effect_metric(b, c) + 1e-12
    assert 0 <= effect_metric(a, b) <= 1
