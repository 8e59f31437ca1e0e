"""Measurement models and their dual quantization.

A measurement model couples the system ``H`` to a probe ``K`` prepared in
``rho0``, evolves the pair by a channel ``Lambda`` on ``H ⊗ K`` (system
factor first) and reads out a pointer POVM ``F`` on the probe.  It measures
``E`` when ``Tr[rho E_x] = Tr[Lambda(rho ⊗ rho0)(I ⊗ F_x)]`` for every state.
Running the same picture backwards through the adjoint channel gives a
quantization: ``Q(f) = Tr_K[(I ⊗ rho0) Lambda*(sum_x f(x) I ⊗ F_x)]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import matrix_core as mc
from .duality import Povm, random_povm
from .effects import ClassicalEffect, OutcomeSpace, QuantumEffect
from .errors import DimensionMismatch, NotPovm, ValidationError
from .states import DensityMatrix, hermitian_frame, random_density


@dataclass(frozen=True, eq=False)
class KrausChannel:
    dim_in: int
    dim_out: int
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(mc.as_matrix(k) for k in self.kraus)
        if not ops:
            raise ValidationError("a channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != (self.dim_out, self.dim_in):
                raise DimensionMismatch(
                    f"Kraus operator has shape {k.shape}, expected ({self.dim_out}, {self.dim_in})"
                )
        total = sum(k.conj().T @ k for k in ops)
        dev = mc.max_abs_diff(total, mc.identity(self.dim_in))
        if dev > mc.default_tol():
            raise ValidationError(f"Kraus operators are not trace preserving (deviation {dev:.3g})")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ops)

    @classmethod
    def unitary(cls, u) -> KrausChannel:
        u = mc.as_matrix(u)
        return cls(u.shape[1], u.shape[0], (u,))

    @classmethod
    def identity(cls, dim: int) -> KrausChannel:
        return cls.unitary(mc.identity(dim))

    @classmethod
    def depolarizing(cls, dim: int) -> KrausChannel:
        """Completely depolarizing channel, Kraus family ``|i><j| / sqrt(d)``."""
        ops = []
        for i in range(dim):
            for j in range(dim):
                k = np.zeros((dim, dim), dtype=np.complex128)
                k[i, j] = 1.0 / np.sqrt(dim)
                ops.append(k)
        return cls(dim, dim, tuple(ops))


def _apply(ch: KrausChannel, op: np.ndarray) -> np.ndarray:
    return sum(k @ op @ k.conj().T for k in ch.kraus)


def apply_channel(ch: KrausChannel, rho):
    """``sum_i K_i rho K_i†``.

    Density matrices map to density matrices; a raw operator (any trace-class
    ``T``) maps to a raw operator.
    """
    op = rho.operator if isinstance(rho, DensityMatrix) else mc.as_matrix(rho)
    if op.shape != (ch.dim_in, ch.dim_in):
        raise DimensionMismatch(f"channel expects {ch.dim_in}x{ch.dim_in} input, got {op.shape}")
    out = _apply(ch, op)
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(mc.hermitian_part(out))
    return out


def channel_adjoint(ch: KrausChannel, b) -> np.ndarray:
    """``Lambda*(B) = sum_i K_i† B K_i``, so ``Tr[Lambda(T) B] = Tr[T Lambda*(B)]``."""
    b = mc.as_matrix(b)
    if b.shape != (ch.dim_out, ch.dim_out):
        raise DimensionMismatch(f"adjoint expects {ch.dim_out}x{ch.dim_out} input, got {b.shape}")
    return sum(k.conj().T @ b @ k for k in ch.kraus)


def choi_matrix(ch: KrausChannel) -> np.ndarray:
    """``(Lambda ⊗ id)(|Omega><Omega|)`` for the normalized maximally entangled ``Omega``.

    Positive semidefinite exactly when the channel is completely positive.
    """
    d = ch.dim_in
    out = np.zeros((ch.dim_out * d, ch.dim_out * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            unit_ij = np.zeros((d, d), dtype=np.complex128)
            unit_ij[i, j] = 1.0
            out += np.kron(_apply(ch, unit_ij), unit_ij)
    return out / d


def random_channel(
    dim_in: int, dim_out: int, n_kraus: int, rng: np.random.Generator
) -> KrausChannel:
    """Gaussian Kraus family ``G_i``, right-normalized by ``(sum G_i† G_i)^{-1/2}``."""
    if n_kraus * dim_out < dim_in:
        raise ValidationError(
            f"{n_kraus} Kraus operators of shape {dim_out}x{dim_in} cannot preserve trace"
        )
    g = rng.normal(size=(n_kraus, dim_out, dim_in)) + 1j * rng.normal(size=(n_kraus, dim_out, dim_in))
    s = np.einsum("kji,kjl->il", g.conj(), g)
    inv_sqrt = mc.psd_inverse_sqrt(s, 1e-12)
    if inv_sqrt is None:
        raise ValidationError("degenerate Kraus draw")
    return KrausChannel(dim_in, dim_out, tuple(k @ inv_sqrt for k in g))


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    system_dim: int
    probe_dim: int
    probe_state: DensityMatrix
    channel: KrausChannel
    pointer: Povm
    joint_dim: int = field(init=False)

    def __post_init__(self):
        joint = self.system_dim * self.probe_dim
        if (self.channel.dim_in, self.channel.dim_out) != (joint, joint):
            raise DimensionMismatch(
                f"channel must act on the {joint}-dimensional joint space, "
                f"got {self.channel.dim_in} -> {self.channel.dim_out}"
            )
        if self.probe_state.dim != self.probe_dim:
            raise DimensionMismatch(f"probe state has dim {self.probe_state.dim}, expected {self.probe_dim}")
        if self.pointer.dim != self.probe_dim:
            raise DimensionMismatch(f"pointer POVM has dim {self.pointer.dim}, expected {self.probe_dim}")
        object.__setattr__(self, "joint_dim", joint)

    @property
    def space(self) -> OutcomeSpace:
        return self.pointer.space


def _lift(model: MeasurementModel, probe_op: np.ndarray) -> np.ndarray:
    return np.kron(mc.identity(model.system_dim), probe_op)


def _discard_probe(model: MeasurementModel, joint_op: np.ndarray) -> np.ndarray:
    """``Tr_K[(I ⊗ rho0) X]``: the probe state weights the partial trace."""
    weighted = _lift(model, model.probe_state.operator) @ joint_op
    return partial_trace_k(weighted, model)


def partial_trace_k(op: np.ndarray, model: MeasurementModel) -> np.ndarray:
    return mc.partial_trace(op, (model.system_dim, model.probe_dim), over="K")


def induced_povm(model: MeasurementModel) -> Povm:
    """``E_x = Tr_K[(I ⊗ rho0) Lambda*(I ⊗ F_x)]``."""
    ops = []
    for f_x in model.pointer.operators:
        ops.append(mc.hermitian_part(_discard_probe(model, channel_adjoint(model.channel, _lift(model, f_x)))))
    try:
        return Povm(model.space, tuple(ops))
    except ValidationError as exc:
        raise NotPovm(f"induced family is not a POVM: {exc}") from None


def outcome_probabilities(model: MeasurementModel, rho: DensityMatrix) -> np.ndarray:
    """Forward evaluation ``x -> Tr[Lambda(rho ⊗ rho0)(I ⊗ F_x)]``."""
    if rho.dim != model.system_dim:
        raise DimensionMismatch(f"state has dim {rho.dim}, model system has dim {model.system_dim}")
    evolved = _apply(model.channel, np.kron(rho.operator, model.probe_state.operator))
    return np.array([np.trace(evolved @ _lift(model, f_x)).real for f_x in model.pointer.operators])


@dataclass
class ModelReport:
    passed: bool
    max_deviation: float
    trials: int
    tol: float
    seed: int
    witness: dict | None = None

    def to_json(self) -> dict:
        return {
            "pass": bool(self.passed),
            "max_deviation": float(self.max_deviation),
            "trials": self.trials,
            "tol": self.tol,
            "seed": self.seed,
            "witness": self.witness,
        }


def check_model_for(
    model: MeasurementModel,
    e: Povm,
    trials: int = 200,
    tol: float | None = None,
    seed: int = 0,
) -> ModelReport:
    """Does ``model`` measure ``e``?

    Probes a spanning state frame plus ``trials`` random states.  Outcomes are
    matched by label; a label present on only one side counts as a zero effect
    on the other.
    """
    tol = mc.resolve_tol(tol)
    if e.dim != model.system_dim:
        raise DimensionMismatch(f"POVM has dim {e.dim}, model system has dim {model.system_dim}")
    rng = np.random.default_rng(seed)
    labels = list(model.space) + [x for x in e.space if x not in model.space.labels]
    states = [DensityMatrix(p) for p in hermitian_frame(model.system_dim)]
    states += [random_density(model.system_dim, rng) for _ in range(trials)]
    worst, witness = 0.0, None
    for k, rho in enumerate(states):
        forward = dict(zip(model.space, outcome_probabilities(model, rho)))
        target = {x: np.trace(rho.operator @ op).real for x, op in zip(e.space, e.operators)}
        for x in labels:
            dev = abs(forward.get(x, 0.0) - target.get(x, 0.0))
            if dev > worst or witness is None:
                worst = max(worst, dev)
                witness = {"outcome": x, "state_index": k, "deviation": float(dev)}
    return ModelReport(worst <= tol, worst, trials, tol, seed, witness)


def dual_model_quantize(model: MeasurementModel, f, extended: bool = False):
    """``Tr_K[(I ⊗ rho0) Lambda*(sum_x f(x) I ⊗ F_x)]``.

    ``f`` is a classical effect on the pointer space.  With ``extended=True``
    ``f`` may be any real-valued function (a mapping or sequence over the
    pointer labels) and the result is a Hermitian matrix rather than an effect.
    """
    if isinstance(f, ClassicalEffect):
        if f.space != model.space:
            raise DimensionMismatch("classical effect does not live on the pointer outcome space")
        values = f.values
    elif extended:
        values = _real_function(model.space, f)
    else:
        raise TypeError("expected a ClassicalEffect (use extended=True for arbitrary real f)")
    pointer_op = np.tensordot(values, model.pointer.operators, axes=1)
    q = mc.hermitian_part(_discard_probe(model, channel_adjoint(model.channel, _lift(model, pointer_op))))
    return q if extended else QuantumEffect(q)


def _real_function(space: OutcomeSpace, f) -> np.ndarray:
    if isinstance(f, dict):
        missing = [x for x in space if x not in f]
        if missing:
            raise ValidationError(f"missing values for labels {missing}")
        values = np.array([f[x] for x in space], dtype=float)
    else:
        values = np.asarray(f, dtype=float)
    if values.shape != (len(space),) or not np.all(np.isfinite(values)):
        raise ValidationError(f"expected {len(space)} finite real values")
    return values


def controlled_shift(d: int) -> np.ndarray:
    """``U|i>|j> = |i>|j + i mod d>`` on ``C^d ⊗ C^d``."""
    u = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            u[i * d + (j + i) % d, i * d + j] = 1.0
    return u


def von_neumann_model(d: int) -> MeasurementModel:
    """Probe ``C^d`` in ``|0>``, controlled-shift coupling, computational pointer."""
    return MeasurementModel(
        system_dim=d,
        probe_dim=d,
        probe_state=DensityMatrix.basis(d, 0),
        channel=KrausChannel.unitary(controlled_shift(d)),
        pointer=Povm.projective(d),
    )


def trivial_model(d: int) -> MeasurementModel:
    """One-dimensional probe, identity evolution, single-outcome pointer."""
    return MeasurementModel(
        system_dim=d,
        probe_dim=1,
        probe_state=DensityMatrix(np.ones((1, 1))),
        channel=KrausChannel.identity(d),
        pointer=Povm(OutcomeSpace(("1",)), (np.ones((1, 1)),)),
    )


def random_model(
    system_dim: int,
    probe_dim: int,
    n_outcomes: int,
    rng: np.random.Generator,
    n_kraus: int | None = None,
    labels: Sequence[str] | None = None,
) -> MeasurementModel:
    joint = system_dim * probe_dim
    space = OutcomeSpace(tuple(labels)) if labels else OutcomeSpace.of_size(n_outcomes)
    return MeasurementModel(
        system_dim=system_dim,
        probe_dim=probe_dim,
        probe_state=random_density(probe_dim, rng),
        channel=random_channel(joint, joint, n_kraus or int(rng.integers(1, 4)), rng),
        pointer=random_povm(probe_dim, n_outcomes, rng, space=space),
    )
