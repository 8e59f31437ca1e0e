import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effectdual.duality import Povm, quantize
from effectdual.effects import ClassicalEffect, OutcomeSpace
from effectdual.errors import DimensionMismatch, ValidationError
from effectdual.measurement_model import (
    KrausChannel,
    MeasurementModel,
    apply_channel,
    channel_adjoint,
    check_model_for,
    choi_matrix,
    controlled_shift,
    dual_model_quantize,
    induced_povm,
    outcome_probabilities,
    random_channel,
    random_model,
    trivial_model,
    von_neumann_model,
)
from effectdual.states import DensityMatrix, random_density

from conftest import random_hermitian


def forward_oracle_povm(model):
    """E_x from the forward picture: (E_x)_ji = Tr[Lambda(|i><j| ⊗ rho0)(I ⊗ F_x)]."""
    d = model.system_dim
    out = []
    for f_x in model.pointer.operators:
        e = np.zeros((d, d), dtype=complex)
        for i in range(d):
            for j in range(d):
                unit_ij = np.zeros((d, d))
                unit_ij[i, j] = 1
                joint = np.kron(unit_ij, model.probe_state.operator)
                evolved = sum(k @ joint @ k.conj().T for k in model.channel.kraus)
                e[j, i] = np.trace(evolved @ np.kron(np.eye(d), f_x))
        out.append(e)
    return np.array(out)


def test_identity_channel(rng):
    rho = random_density(3, rng)
    assert np.abs(apply_channel(KrausChannel.identity(3), rho).operator - rho.operator).max() == 0


def test_unitary_channel(rng):
    rho = random_density(2, rng)
    u = np.array([[1, 1], [1j, -1j]]) / np.sqrt(2)
    got = apply_channel(KrausChannel.unitary(u), rho).operator
    assert np.abs(got - u @ rho.operator @ u.conj().T).max() < 1e-15


def test_depolarizing_channel(rng):
    for d in (1, 2, 4):
        rho = random_density(d, rng)
        assert np.abs(apply_channel(KrausChannel.depolarizing(d), rho).operator - np.eye(d) / d).max() < 1e-15


def test_channel_rejects_non_trace_preserving():
    with pytest.raises(ValidationError):
        KrausChannel(2, 2, (0.5 * np.eye(2),))
    with pytest.raises(DimensionMismatch):
        KrausChannel(2, 3, (np.eye(2),))


def test_adjoint_examples(rng):
    b = random_hermitian(rng, 3)
    assert np.abs(channel_adjoint(KrausChannel.identity(3), b) - b).max() == 0
    ch = random_channel(3, 2, 2, rng)
    assert np.abs(channel_adjoint(ch, np.eye(2)) - np.eye(3)).max() < 1e-12


def test_adjoint_pairing(rng):
    for _ in range(50):
        d_in, d_out = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        ch = random_channel(d_in, d_out, -(-d_in // d_out) + 1, rng)
        t, b = random_hermitian(rng, d_in), random_hermitian(rng, d_out)
        lhs = np.trace(apply_channel(ch, t) @ b)
        rhs = np.trace(t @ channel_adjoint(ch, b))
        assert abs(lhs - rhs) < 1e-10


def test_random_channel_needs_enough_kraus(rng):
    with pytest.raises(ValidationError):
        random_channel(4, 1, 2, rng)


def test_choi_matrix(rng):
    c = choi_matrix(KrausChannel.identity(2))
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.abs(c - np.outer(bell, bell)).max() < 1e-15
    ch = random_channel(3, 3, 2, rng)
    c = choi_matrix(ch)
    assert np.linalg.eigvalsh(c)[0] > -1e-12 and abs(np.trace(c) - 1) < 1e-12


def test_controlled_shift_is_unitary_permutation():
    u = controlled_shift(3)
    assert np.abs(u.conj().T @ u - np.eye(9)).max() == 0
    # |1>|2> -> |1>|0>
    assert u[1 * 3 + 0, 1 * 3 + 2] == 1


def test_trivial_probe_induces_identity():
    povm = induced_povm(trivial_model(3))
    assert len(povm.space) == 1 and np.abs(povm.operators[0] - np.eye(3)).max() == 0


def test_von_neumann_induces_basis_projectors():
    for d in (2, 3, 4):
        povm = induced_povm(von_neumann_model(d))
        assert np.abs(povm.operators - Povm.projective(d).operators).max() <= 1e-12


def test_induced_matches_forward_oracle(rng):
    for _ in range(10):
        model = random_model(int(rng.integers(1, 4)), int(rng.integers(1, 4)), int(rng.integers(1, 5)), rng)
        assert np.abs(induced_povm(model).operators - forward_oracle_povm(model)).max() < 1e-12


def test_model_for_own_induced_povm(rng):
    model = random_model(3, 2, 4, rng)
    rep = check_model_for(model, induced_povm(model), trials=200)
    assert rep.passed and rep.max_deviation <= 1e-10


def test_von_neumann_model_checks():
    vn = von_neumann_model(2)
    assert check_model_for(vn, Povm.projective(2)).passed
    rep = check_model_for(vn, Povm.trine(), trials=20)
    assert not rep.passed and rep.max_deviation >= 0.1
    assert rep.witness is not None


def test_ground_state_probabilities_differ_for_trine():
    probs = outcome_probabilities(von_neumann_model(2), DensityMatrix.basis(2, 0))
    assert np.abs(probs - [1, 0]).max() < 1e-15


def test_model_check_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        check_model_for(von_neumann_model(2), Povm.projective(3))


def test_dual_quantize_unit_and_indicators(rng):
    model = random_model(2, 3, 3, rng)
    one = ClassicalEffect.constant(model.space, 1.0)
    assert np.abs(dual_model_quantize(model, one).operator - np.eye(2)).max() < 1e-12
    induced = induced_povm(model)
    for x in model.space:
        got = dual_model_quantize(model, ClassicalEffect.indicator(model.space, x)).operator
        assert np.abs(got - induced.effect(x).operator).max() < 1e-12


def test_dual_quantize_extended_real_function(rng):
    model = random_model(2, 2, 3, rng)
    f = {"0": -1.5, "1": 2.0, "2": 0.25}
    got = dual_model_quantize(model, f, extended=True)
    expected = sum(v * induced_povm(model).effect(x).operator for x, v in f.items())
    assert np.abs(got - expected).max() < 1e-12
    with pytest.raises(TypeError):
        dual_model_quantize(model, f)
    with pytest.raises(ValidationError):
        dual_model_quantize(model, {"0": 1.0}, extended=True)


def test_model_validation(rng):
    with pytest.raises(DimensionMismatch):
        MeasurementModel(2, 2, DensityMatrix.basis(2, 0), KrausChannel.identity(3), Povm.projective(2))
    with pytest.raises(DimensionMismatch):
        MeasurementModel(2, 2, DensityMatrix.basis(3, 0), KrausChannel.identity(4), Povm.projective(2))


@settings(max_examples=40, deadline=None)
@given(d=st.integers(1, 3), k=st.integers(1, 3), n=st.integers(1, 4), seed=st.integers(0, 2**32 - 1))
def test_central_identity_property(d, k, n, seed):
    rng = np.random.default_rng(seed)
    model = random_model(d, k, n, rng, labels=[f"p{i}" for i in range(n)])
    f = ClassicalEffect(model.space, rng.uniform(size=n))
    lhs = dual_model_quantize(model, f).operator
    rhs = quantize(induced_povm(model), f).operator
    assert np.abs(lhs - rhs).max() <= 1e-10
    assert model.space == OutcomeSpace(tuple(f"p{i}" for i in range(n)))
