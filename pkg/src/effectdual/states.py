"""Classical and quantum state spaces and functional extraction.

Probability vectors and density matrices are the two convex spaces.  The
extraction routines turn black-box affine functionals back into the concrete
object that induces them: a classical effect ``f`` with ``phi(mu) = sum f·mu``,
or a density matrix ``rho`` with ``beta(A) = Tr[rho A]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from . import matrix_core as mc
from .effects import ClassicalEffect, OutcomeSpace, QuantumEffect, random_effect
from .errors import DimensionMismatch, NotAffine, NotState, RangeViolation, ValidationError

AFFINITY_PROBES = 50
AFFINITY_THRESHOLD = 1e-8


def clamp_probability(p: float, tol: float | None = None) -> float:
    """Clamp a numerically computed probability into ``[0, 1]``.

    Values further than ``tol`` outside the interval are a bug upstream, not
    rounding, and raise.
    """
    tol = mc.resolve_tol(tol)
    p = float(p)
    if p < -tol or p > 1 + tol:
        raise RangeViolation(f"probability {p!r} lies outside [0, 1]")
    return min(1.0, max(0.0, p))


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    space: OutcomeSpace
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.space),):
            raise DimensionMismatch(f"expected {len(self.space)} weights, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValidationError("weights must be finite")
        tol = mc.default_tol()
        if w.min() < -tol:
            raise NotState(f"negative weight {w.min():.3g}")
        if abs(w.sum() - 1.0) > tol:
            raise NotState(f"weights sum to {w.sum():.12g}, not 1")
        w = np.clip(w, 0.0, None)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_mapping(cls, space: OutcomeSpace, weights: dict) -> ProbabilityVector:
        missing = [x for x in space if x not in weights]
        if missing:
            raise ValidationError(f"missing weights for labels {missing}")
        extra = [x for x in weights if x not in space.labels]
        if extra:
            raise ValidationError(f"weights for unknown labels {extra}")
        return cls(space, np.array([weights[x] for x in space], dtype=float))

    @classmethod
    def point_mass(cls, space: OutcomeSpace, label: str) -> ProbabilityVector:
        w = np.zeros(len(space))
        w[space.index(label)] = 1.0
        return cls(space, w)

    def __call__(self, label: str) -> float:
        return float(self.weights[self.space.index(label)])

    def as_dict(self) -> dict[str, float]:
        return {x: float(p) for x, p in zip(self.space, self.weights)}


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    operator: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        op = mc.as_matrix(self.operator)
        if op.shape[0] != op.shape[1]:
            raise DimensionMismatch(f"density operator must be square, got {op.shape}")
        tol = mc.default_tol()
        if not mc.is_hermitian(op, tol):
            raise NotState("density operator is not Hermitian")
        if not mc.is_psd(op, tol):
            raise NotState("density operator is not positive semidefinite")
        tr = np.trace(op)
        if abs(tr - 1.0) > tol:
            raise NotState(f"density operator has trace {tr.real:.12g}, not 1")
        op = np.array(op, copy=True)
        op.setflags(write=False)
        object.__setattr__(self, "operator", op)
        object.__setattr__(self, "dim", op.shape[0])

    @classmethod
    def pure(cls, ket) -> DensityMatrix:
        v = np.asarray(ket, dtype=np.complex128).ravel()
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def basis(cls, dim: int, i: int) -> DensityMatrix:
        v = np.zeros(dim, dtype=np.complex128)
        v[i] = 1.0
        return cls.pure(v)

    @classmethod
    def maximally_mixed(cls, dim: int) -> DensityMatrix:
        return cls(mc.identity(dim) / dim)


State = Union[ProbabilityVector, DensityMatrix]
AffineFunctional = Callable[[object], float]


def convex_combine(r: float, s, t):
    """``c_r(s, t) = r·s + (1 - r)·t`` for states (or quantum effects)."""
    r = float(r)
    if not 0.0 <= r <= 1.0:
        raise ValidationError(f"convex weight must lie in [0, 1], got {r}")
    if type(s) is not type(t):
        raise TypeError(f"cannot combine {type(s).__name__} with {type(t).__name__}")
    if isinstance(s, ProbabilityVector):
        if s.space != t.space:
            raise DimensionMismatch("probability vectors live on different spaces")
        return ProbabilityVector(s.space, r * s.weights + (1 - r) * t.weights)
    if isinstance(s, (DensityMatrix, QuantumEffect)):
        if s.dim != t.dim:
            raise DimensionMismatch(f"dimensions differ: {s.dim} vs {t.dim}")
        return type(s)(r * s.operator + (1 - r) * t.operator)
    if isinstance(s, ClassicalEffect):
        if s.space != t.space:
            raise DimensionMismatch("effects live on different spaces")
        return ClassicalEffect(s.space, r * s.values + (1 - r) * t.values)
    raise TypeError(f"no convex structure for {type(s).__name__}")


def expectation(rho: DensityMatrix, e: QuantumEffect) -> float:
    if rho.dim != e.dim:
        raise DimensionMismatch(f"state has dim {rho.dim}, effect has dim {e.dim}")
    return clamp_probability(np.trace(rho.operator @ e.operator).real)


def random_probability(space: OutcomeSpace, rng: np.random.Generator) -> ProbabilityVector:
    return ProbabilityVector(space, rng.dirichlet(np.ones(len(space))))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Ginibre-ensemble density matrix; full rank unless ``rank`` is given."""
    k = dim if rank is None else rank
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    rho = g @ g.conj().T
    return DensityMatrix(mc.hermitian_part(rho / np.trace(rho).real))


def affinity_violation(
    phi: Callable,
    sample: Callable[[np.random.Generator], object],
    rng: np.random.Generator,
    probes: int = AFFINITY_PROBES,
) -> float:
    """Largest ``|phi(c_r(s,t)) - (r·phi(s) + (1-r)·phi(t))|`` over random probes.

    ``phi`` may be scalar- or vector-valued.
    """
    worst = 0.0
    for _ in range(probes):
        s, t, r = sample(rng), sample(rng), rng.uniform()
        lhs = np.asarray(phi(convex_combine(r, s, t)), dtype=float)
        rhs = r * np.asarray(phi(s), dtype=float) + (1 - r) * np.asarray(phi(t), dtype=float)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def riesz_extract(
    phi: AffineFunctional,
    space: OutcomeSpace,
    *,
    probes: int = AFFINITY_PROBES,
    threshold: float = AFFINITY_THRESHOLD,
    seed: int = 0,
    tol: float | None = None,
) -> ClassicalEffect:
    """Recover ``f`` with ``phi(mu) = sum_x f(x) mu(x)`` from an affine ``phi``.

    On a finite space the point masses span, so ``f(x) = phi(delta_x)``.
    """
    rng = np.random.default_rng(seed)
    worst = affinity_violation(phi, lambda g: random_probability(space, g), rng, probes)
    if worst > threshold:
        raise NotAffine(f"functional violates affinity by {worst:.3g}")
    tol = mc.resolve_tol(tol)
    vals = np.array([float(phi(ProbabilityVector.point_mass(space, x))) for x in space])
    bad = [x for x, v in zip(space, vals) if v < -tol or v > 1 + tol]
    if bad:
        raise RangeViolation(f"f leaves [0, 1] at {bad}")
    return ClassicalEffect(space, np.clip(vals, 0.0, 1.0))


def hermitian_frame(dim: int) -> list[np.ndarray]:
    """Rank-one projectors spanning the Hermitian ``dim × dim`` matrices.

    Order: ``|i><i|`` for each ``i``, then for each ``i < j`` the projectors
    onto ``(|i> + |j>)/√2`` and ``(|i> + i|j>)/√2``.  Each is both a valid
    effect and a valid density matrix.
    """
    frame = []
    for i in range(dim):
        p = np.zeros((dim, dim), dtype=np.complex128)
        p[i, i] = 1.0
        frame.append(p)
    for i in range(dim):
        for j in range(i + 1, dim):
            for phase in (1.0, 1j):
                v = np.zeros(dim, dtype=np.complex128)
                v[i], v[j] = 1.0, phase
                frame.append(0.5 * np.outer(v, v.conj()))
    return frame


def frame_reconstruct(values, dim: int) -> np.ndarray:
    """Invert ``values[k] = Tr[frame[k] X]`` for Hermitian ``X``.

    With ``p_i = X_ii``, ``a = (p_i + p_j)/2 + Re X_ij`` and
    ``b = (p_i + p_j)/2 - Im X_ij``.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (dim * dim,):
        raise DimensionMismatch(f"expected {dim * dim} frame values, got {values.shape}")
    x = np.zeros((dim, dim), dtype=np.complex128)
    diag = values[:dim]
    x[np.diag_indices(dim)] = diag
    k = dim
    for i in range(dim):
        for j in range(i + 1, dim):
            a, b = values[k], values[k + 1]
            k += 2
            mean = 0.5 * (diag[i] + diag[j])
            x[i, j] = (a - mean) + 1j * (mean - b)
            x[j, i] = np.conj(x[i, j])
    return x


def busch_extract(
    beta: AffineFunctional,
    dim: int,
    *,
    probes: int = AFFINITY_PROBES,
    threshold: float = AFFINITY_THRESHOLD,
    seed: int = 0,
    tol: float | None = None,
) -> DensityMatrix:
    """Recover ``rho`` with ``beta(A) = Tr[rho A]`` from a functional on effects."""
    tol = mc.resolve_tol(tol)
    rng = np.random.default_rng(seed)
    worst = affinity_violation(beta, lambda g: random_effect(dim, g), rng, probes)
    if worst > threshold:
        raise NotAffine(f"functional violates affinity by {worst:.3g}")
    at_one = float(beta(QuantumEffect.identity(dim)))
    at_zero = float(beta(QuantumEffect.zero(dim)))
    if abs(at_one - 1.0) > tol or abs(at_zero) > tol:
        raise NotState(f"beta(I) = {at_one:.6g}, beta(0) = {at_zero:.6g}; expected 1 and 0")
    values = [float(beta(QuantumEffect(p))) for p in hermitian_frame(dim)]
    rho = frame_reconstruct(values, dim)
    if not mc.is_psd(rho, tol):
        raise NotState("reconstructed operator is not positive semidefinite")
    try:
        return DensityMatrix(rho)
    except ValidationError as exc:
        raise NotState(str(exc)) from None


def separating_effect(rho: DensityMatrix, sigma: DensityMatrix) -> QuantumEffect:
    """Projector onto the positive part of ``rho - sigma``.

    Its expectation gap equals half the trace distance, so it separates any
    two distinct states.
    """
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"dimensions differ: {rho.dim} vs {sigma.dim}")
    vals, vecs = np.linalg.eigh(mc.hermitian_part(rho.operator - sigma.operator))
    pos = vecs[:, vals > 0]
    return QuantumEffect(pos @ pos.conj().T)
