"""POVMs and the quantization/measurement pair they induce.

A POVM ``{E_x}`` on a finite outcome space determines both the quantization
``Q(f) = sum_x f(x) E_x`` of classical effects and the measurement
``M(rho)(x) = Tr[rho E_x]`` of states.  Conversely any well-behaved black-box
``Q`` or ``M`` is recovered as a POVM by probing it on indicators or on a
spanning state frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import matrix_core as mc
from .effects import ClassicalEffect, OutcomeSpace, QuantumEffect, is_effect_module_hom
from .errors import DimensionMismatch, NotAffine, NotHomomorphism, NotPovm, ValidationError
from .states import (
    AFFINITY_PROBES,
    AFFINITY_THRESHOLD,
    DensityMatrix,
    ProbabilityVector,
    affinity_violation,
    frame_reconstruct,
    hermitian_frame,
    random_density,
)

RNG_ALGORITHM = "numpy.random.default_rng/PCG64"


@dataclass(frozen=True, eq=False)
class Povm:
    space: OutcomeSpace
    effects: tuple[QuantumEffect, ...]
    dim: int = field(init=False)

    def __post_init__(self):
        effects = tuple(e if isinstance(e, QuantumEffect) else QuantumEffect(e) for e in self.effects)
        if len(effects) != len(self.space):
            raise NotPovm(f"{len(self.space)} outcomes but {len(effects)} effects")
        dims = {e.dim for e in effects}
        if len(dims) != 1:
            raise NotPovm(f"effects have mixed dimensions {sorted(dims)}")
        dim = dims.pop()
        total = sum(e.operator for e in effects)
        dev = mc.max_abs_diff(total, mc.identity(dim))
        if dev > mc.default_tol():
            raise NotPovm(f"effects do not sum to identity (deviation {dev:.3g})")
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "dim", dim)

    @classmethod
    def from_mapping(cls, space: OutcomeSpace, effects: dict) -> Povm:
        missing = [x for x in space if x not in effects]
        if missing:
            raise NotPovm(f"missing effects for labels {missing}")
        return cls(space, tuple(effects[x] for x in space))

    @classmethod
    def projective(cls, dim: int, space: OutcomeSpace | None = None) -> Povm:
        """Computational-basis projectors ``|x><x|``."""
        space = space or OutcomeSpace.of_size(dim)
        eye = mc.identity(dim)
        return cls(space, tuple(np.outer(eye[i], eye[i]) for i in range(dim)))

    @classmethod
    def trine(cls) -> Povm:
        """``E_k = (2/3)|psi_k><psi_k|`` with ``psi_k`` at planar angle ``2πk/3``."""
        effects = []
        for k in range(3):
            t = 2 * np.pi * k / 3
            v = np.array([np.cos(t), np.sin(t)], dtype=np.complex128)
            effects.append((2 / 3) * np.outer(v, v.conj()))
        return cls(OutcomeSpace.of_size(3), tuple(effects))

    @property
    def operators(self) -> np.ndarray:
        return np.stack([e.operator for e in self.effects])

    def effect(self, label: str) -> QuantumEffect:
        return self.effects[self.space.index(label)]


@dataclass(frozen=True, eq=False)
class QuantizationMap:
    """Either canonical (backed by a POVM) or a black-box callable."""

    space: OutcomeSpace
    povm: Povm | None = None
    func: Callable[[ClassicalEffect], QuantumEffect] | None = None

    def __post_init__(self):
        if (self.povm is None) == (self.func is None):
            raise ValueError("give exactly one of povm or func")
        if self.povm is not None and self.povm.space != self.space:
            raise DimensionMismatch("POVM outcome space differs from map domain")

    @classmethod
    def canonical(cls, povm: Povm) -> QuantizationMap:
        return cls(povm.space, povm=povm)

    def __call__(self, f: ClassicalEffect) -> QuantumEffect:
        if self.povm is not None:
            return quantize(self.povm, f)
        return self.func(f)


@dataclass(frozen=True, eq=False)
class MeasurementMap:
    """Either canonical (backed by a POVM) or a black-box callable."""

    space: OutcomeSpace
    dim: int
    povm: Povm | None = None
    func: Callable[[DensityMatrix], ProbabilityVector] | None = None

    def __post_init__(self):
        if (self.povm is None) == (self.func is None):
            raise ValueError("give exactly one of povm or func")
        if self.povm is not None and (self.povm.space != self.space or self.povm.dim != self.dim):
            raise DimensionMismatch("POVM does not match the map's space/dimension")

    @classmethod
    def canonical(cls, povm: Povm) -> MeasurementMap:
        return cls(povm.space, povm.dim, povm=povm)

    def __call__(self, rho: DensityMatrix) -> ProbabilityVector:
        if self.povm is not None:
            return measure(self.povm, rho)
        return self.func(rho)


def _as_povm(q) -> Povm | None:
    if isinstance(q, Povm):
        return q
    return q.povm


def quantize(q: Povm | QuantizationMap, f: ClassicalEffect) -> QuantumEffect:
    """``Q(f) = sum_x f(x) E_x``."""
    povm = _as_povm(q)
    if povm is None:
        return q(f)
    if f.space != povm.space:
        raise DimensionMismatch("classical effect lives on a different outcome space")
    op = np.tensordot(f.values, povm.operators, axes=1)
    return QuantumEffect(op)


def measure(m: Povm | MeasurementMap, rho: DensityMatrix) -> ProbabilityVector:
    """``M(rho)(x) = Tr[rho E_x]``."""
    povm = _as_povm(m)
    if povm is None:
        return m(rho)
    if rho.dim != povm.dim:
        raise DimensionMismatch(f"state has dim {rho.dim}, POVM has dim {povm.dim}")
    # Tr[rho E] = sum_ij rho_ij E_ji
    probs = np.einsum("ij,xji->x", rho.operator, povm.operators).real
    return ProbabilityVector(povm.space, np.clip(probs, 0.0, None))


def povm_from_quantization(
    q: QuantizationMap | Callable[[ClassicalEffect], QuantumEffect],
    space: OutcomeSpace | None = None,
    *,
    samples: int = 20,
    tol: float | None = None,
    seed: int = 0,
) -> Povm:
    """Recover ``E_x = q(1_x)`` after probing ``q`` for additivity and scaling."""
    tol = mc.resolve_tol(tol)
    if isinstance(q, QuantizationMap):
        space = q.space
    if space is None:
        raise ValueError("a black-box quantization needs its outcome space")
    report = is_effect_module_hom(q, space, samples=samples, tol=tol, seed=seed, check_unit=False)
    if not report.ok:
        raise NotHomomorphism(report.violation)
    ops = []
    for x in space:
        e = q(ClassicalEffect.indicator(space, x))
        if not isinstance(e, QuantumEffect):
            raise NotHomomorphism(f"q(1_{x}) is not a quantum effect")
        ops.append(e.operator)
    try:
        povm = Povm(space, tuple(ops))
    except NotPovm:
        raise
    except ValidationError as exc:
        raise NotPovm(str(exc)) from None
    rng = np.random.default_rng(seed + 1)
    for _ in range(samples):
        f = ClassicalEffect(space, rng.uniform(size=len(space)))
        dev = mc.max_abs_diff(quantize(povm, f).operator, q(f).operator)
        if dev > tol:
            raise NotHomomorphism(f"recovered POVM disagrees with q by {dev:.3g}")
    return povm


def povm_from_measurement(
    m: MeasurementMap | Callable[[DensityMatrix], ProbabilityVector],
    space: OutcomeSpace | None = None,
    dim: int | None = None,
    *,
    probes: int = AFFINITY_PROBES,
    threshold: float = AFFINITY_THRESHOLD,
    seed: int = 0,
) -> Povm:
    """Recover the POVM behind a measurement by linear inversion on a state frame."""
    if isinstance(m, MeasurementMap):
        space, dim = m.space, m.dim
    if space is None or dim is None:
        raise ValueError("a black-box measurement needs its outcome space and dimension")
    rng = np.random.default_rng(seed)
    worst = affinity_violation(
        lambda rho: m(rho).weights, lambda g: random_density(dim, g), rng, probes
    )
    if worst > threshold:
        raise NotAffine(f"measurement violates affinity by {worst:.3g}")
    table = np.array([m(DensityMatrix(p)).weights for p in hermitian_frame(dim)])
    ops = tuple(frame_reconstruct(table[:, k], dim) for k in range(len(space)))
    try:
        return Povm(space, ops)
    except NotPovm:
        raise
    except ValidationError as exc:
        raise NotPovm(str(exc)) from None


@dataclass
class DualityReport:
    trials: int
    max_deviation: float
    passed: bool
    seed: int
    tol: float

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "max_deviation": float(self.max_deviation),
            "pass": bool(self.passed),
            "seed": self.seed,
            "tol": self.tol,
            "rng": RNG_ALGORITHM,
        }


def duality_deviation(povm: Povm, rho: DensityMatrix, f: ClassicalEffect) -> float:
    """``|Tr[rho Q(f)] - sum_x f(x) M(rho)(x)|``, both sides computed separately."""
    lhs = np.trace(rho.operator @ quantize(povm, f).operator).real
    rhs = float(np.dot(f.values, measure(povm, rho).weights))
    return abs(lhs - rhs)


def verify_duality_square(
    povm: Povm, trials: int = 500, tol: float | None = None, seed: int = 0
) -> DualityReport:
    tol = mc.resolve_tol(tol)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        rho = random_density(povm.dim, rng)
        f = ClassicalEffect(povm.space, rng.uniform(size=len(povm.space)))
        worst = max(worst, duality_deviation(povm, rho, f))
    return DualityReport(trials, worst, worst <= tol, seed, tol)


def random_povm(
    dim: int,
    n_outcomes: int,
    seed: int | np.random.Generator = 0,
    space: OutcomeSpace | None = None,
    max_retries: int = 10,
) -> Povm:
    """Random POVM ``E_x = S^{-1/2} G_x S^{-1/2}`` with ``G_x = B_x† B_x``, ``S = sum G_x``."""
    if dim < 1 or n_outcomes < 1:
        raise ValidationError("dim and n_outcomes must be positive")
    space = space or OutcomeSpace.of_size(n_outcomes)
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        b = rng.normal(size=(n_outcomes, dim, dim)) + 1j * rng.normal(size=(n_outcomes, dim, dim))
        g = np.einsum("xji,xjk->xik", b.conj(), b)
        inv_sqrt = mc.psd_inverse_sqrt(g.sum(axis=0), 1e-10)
        if inv_sqrt is None:
            continue
        effects = [mc.hermitian_part(inv_sqrt @ gx @ inv_sqrt) for gx in g]
        return Povm(space, tuple(effects))
    raise ValidationError("could not draw a non-singular POVM")


def fit_povm_from_quantization_samples(
    space: OutcomeSpace, samples: Sequence[tuple[ClassicalEffect, np.ndarray]]
) -> tuple[Povm, float]:
    """Least-squares POVM from recorded ``(f, Q(f))`` pairs, plus the fit residual."""
    if not samples:
        raise ValidationError("transcript has no samples")
    fs = np.array([f.values for f, _ in samples])
    qs = np.array([mc.as_matrix(q) for _, q in samples])
    n, d = len(space), qs.shape[1]
    if np.linalg.matrix_rank(fs) < n:
        raise ValidationError("transcript samples do not determine the POVM (rank deficient)")
    sol, *_ = np.linalg.lstsq(fs, qs.reshape(len(samples), -1), rcond=None)
    ops = [mc.hermitian_part(s.reshape(d, d)) for s in sol]
    residual = float(np.max(np.abs(fs @ np.array(ops).reshape(n, -1) - qs.reshape(len(samples), -1))))
    return Povm(space, tuple(ops)), residual


def fit_povm_from_measurement_samples(
    space: OutcomeSpace, dim: int, samples: Sequence[tuple[DensityMatrix, ProbabilityVector]]
) -> tuple[Povm, float]:
    """Least-squares POVM from recorded ``(rho, M(rho))`` pairs, plus the fit residual."""
    if not samples:
        raise ValidationError("transcript has no samples")
    # Tr[rho E] = sum_ij rho_ji E_ij = vec(rho^T) · vec(E)
    a = np.array([rho.operator.T.ravel() for rho, _ in samples])
    p = np.array([mu.weights for _, mu in samples])
    if np.linalg.matrix_rank(a) < dim * dim:
        raise ValidationError("transcript states do not span the operator space")
    sol, *_ = np.linalg.lstsq(a, p.astype(np.complex128), rcond=None)
    ops = [mc.hermitian_part(sol[:, k].reshape(dim, dim)) for k in range(len(space))]
    pred = (a @ np.array(ops).reshape(len(space), -1).T).real
    residual = float(np.max(np.abs(pred - p)))
    return Povm(space, tuple(ops)), residual
