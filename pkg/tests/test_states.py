import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effectdual.effects import OutcomeSpace, QuantumEffect, random_effect
from effectdual.errors import DimensionMismatch, NotAffine, NotState, RangeViolation, ValidationError
from effectdual.states import (
    DensityMatrix,
    ProbabilityVector,
    busch_extract,
    clamp_probability,
    convex_combine,
    expectation,
    frame_reconstruct,
    hermitian_frame,
    random_density,
    random_probability,
    riesz_extract,
    separating_effect,
)

X4 = OutcomeSpace.of_size(4)


def test_probability_vector_validation():
    with pytest.raises(NotState):
        ProbabilityVector(X4, [0.5, 0.5, 0.5, -0.5])
    with pytest.raises(NotState):
        ProbabilityVector(X4, [0.1, 0.1, 0.1, 0.1])
    mu = ProbabilityVector.point_mass(X4, "2")
    assert mu("2") == 1.0 and mu("0") == 0.0


def test_density_matrix_validation():
    with pytest.raises(NotState):
        DensityMatrix(np.diag([1.2, -0.2]))
    with pytest.raises(NotState):
        DensityMatrix(np.diag([0.5, 0.4]))
    with pytest.raises(NotState):
        DensityMatrix(np.array([[0.5, 0.5], [0.0, 0.5]]))
    assert np.abs(DensityMatrix.maximally_mixed(3).operator - np.eye(3) / 3).max() < 1e-15


def test_convex_combine_examples(rng):
    x, y = random_density(3, rng), random_density(3, rng)
    assert np.abs(convex_combine(0.3, x, x).operator - x.operator).max() < 1e-15
    assert np.abs(convex_combine(0.0, x, y).operator - y.operator).max() == 0
    half = convex_combine(0.5, DensityMatrix.basis(2, 0), DensityMatrix.basis(2, 1))
    assert np.abs(half.operator - np.diag([0.5, 0.5])).max() == 0


def test_convex_combine_rejects_bad_input(rng):
    x = random_density(2, rng)
    with pytest.raises(ValidationError):
        convex_combine(1.5, x, x)
    with pytest.raises(DimensionMismatch):
        convex_combine(0.5, x, random_density(3, rng))
    with pytest.raises(TypeError):
        convex_combine(0.5, x, random_probability(X4, rng))


def test_expectation_examples(rng):
    rho = random_density(3, rng)
    assert abs(expectation(rho, QuantumEffect.identity(3)) - 1) < 1e-12
    assert expectation(DensityMatrix.basis(2, 0), QuantumEffect(np.diag([0.0, 1.0]))) == 0
    assert abs(expectation(DensityMatrix.maximally_mixed(2), QuantumEffect(np.diag([0.3, 0.9]))) - 0.6) < 1e-15


def test_clamp_probability():
    assert clamp_probability(1 + 1e-12) == 1.0
    assert clamp_probability(-1e-12) == 0.0
    with pytest.raises(RangeViolation):
        clamp_probability(1.1)


def test_riesz_point_evaluation():
    f = riesz_extract(lambda mu: mu("1"), X4)
    assert np.abs(f.values - [0, 1, 0, 0]).max() == 0


def test_riesz_constant():
    f = riesz_extract(lambda mu: 0.5, X4)
    assert np.abs(f.values - 0.5).max() == 0


def test_riesz_hidden_function(rng):
    hidden = rng.uniform(size=len(X4))
    f = riesz_extract(lambda mu: float(hidden @ mu.weights), X4)
    assert np.abs(f.values - hidden).max() < 1e-12
    for _ in range(100):
        mu = random_probability(X4, rng)
        assert abs(f.values @ mu.weights - hidden @ mu.weights) < 1e-10


def test_riesz_rejects_non_affine():
    with pytest.raises(NotAffine):
        riesz_extract(lambda mu: float(mu.weights[0] ** 2), X4)


def test_riesz_rejects_out_of_range():
    with pytest.raises(RangeViolation):
        riesz_extract(lambda mu: float(2 * mu.weights[0]), X4)


def test_hermitian_frame_inversion(rng):
    for d in range(1, 6):
        frame = hermitian_frame(d)
        assert len(frame) == d * d
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        h = a + a.conj().T
        values = [np.trace(p @ h).real for p in frame]
        assert np.abs(frame_reconstruct(values, d) - h).max() < 1e-12
        for p in frame:
            DensityMatrix(p)
            QuantumEffect(p)


def test_busch_ground_state():
    rho = busch_extract(lambda a: a.operator[0, 0].real, 2)
    assert np.abs(rho.operator - np.diag([1.0, 0.0])).max() < 1e-15


def test_busch_normalized_trace():
    rho = busch_extract(lambda a: np.trace(a.operator).real / 3, 3)
    assert np.abs(rho.operator - np.eye(3) / 3).max() < 1e-15


def test_busch_hidden_state(rng):
    for d in range(2, 6):
        hidden = random_density(d, rng)
        rho = busch_extract(lambda a: np.trace(hidden.operator @ a.operator).real, d)
        assert np.abs(rho.operator - hidden.operator).max() < 1e-9
        for _ in range(100):
            e = random_effect(d, rng)
            assert abs(expectation(rho, e) - expectation(hidden, e)) < 1e-10


def test_busch_rejects_non_affine_and_unnormalized():
    with pytest.raises(NotAffine):
        busch_extract(lambda a: np.trace(a.operator @ a.operator).real / 2, 2)
    with pytest.raises(NotState):
        busch_extract(lambda a: 0.5 * a.operator[0, 0].real, 2)


def test_separating_effect(rng):
    rho, sigma = random_density(3, rng), random_density(3, rng)
    e = separating_effect(rho, sigma)
    gap = expectation(rho, e) - expectation(sigma, e)
    half_trace_distance = 0.5 * np.abs(np.linalg.eigvalsh(rho.operator - sigma.operator)).sum()
    assert abs(gap - half_trace_distance) < 1e-12 and gap > 0


@settings(max_examples=60, deadline=None)
@given(d=st.integers(1, 4), n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_convex_space_laws(d, n, seed):
    rng = np.random.default_rng(seed)
    space = OutcomeSpace.of_size(n)
    for make, arr in ((lambda: random_density(d, rng), lambda s: s.operator),
                      (lambda: random_probability(space, rng), lambda s: s.weights)):
        x, y, z = make(), make(), make()
        r, s = rng.uniform(0.01, 1), rng.uniform()
        t = r + (1 - r) * s
        assert np.abs(arr(convex_combine(r, x, y)) - arr(convex_combine(1 - r, y, x))).max() < 1e-12
        lhs = convex_combine(r, x, convex_combine(s, y, z))
        rhs = convex_combine(t, convex_combine(r / t, x, y), z)
        assert np.abs(arr(lhs) - arr(rhs)).max() < 1e-12


@settings(max_examples=60, deadline=None)
@given(d=st.integers(1, 4), seed=st.integers(0, 2**32 - 1))
def test_expectation_is_affine_in_state(d, seed):
    rng = np.random.default_rng(seed)
    rho, sigma, e = random_density(d, rng), random_density(d, rng), random_effect(d, rng)
    r = rng.uniform()
    mixed = expectation(convex_combine(r, rho, sigma), e)
    assert abs(mixed - r * expectation(rho, e) - (1 - r) * expectation(sigma, e)) < 1e-12
