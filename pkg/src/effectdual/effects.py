"""Classical and quantum effect modules.

A classical effect is a function from a finite outcome space into ``[0, 1]``;
a quantum effect is an operator ``E`` with ``0 <= E <= I``.  Both carry the
same partial algebra: a partial sum ``ovee`` defined only when the result
stays below the unit, the orthosupplement ``neg`` and the ``[0, 1]`` scalar
action.  Values are validated once, at construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from . import matrix_core as mc
from .errors import DimensionMismatch, NotOrthogonal, ValidationError


@dataclass(frozen=True)
class OutcomeSpace:
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels:
            raise ValidationError("outcome space must be non-empty")
        if not all(isinstance(x, str) for x in labels):
            raise ValidationError("outcome labels must be strings")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"outcome labels must be distinct: {list(labels)}")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def of_size(cls, n: int) -> OutcomeSpace:
        return cls(tuple(str(i) for i in range(n)))

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown outcome label {label!r}") from None


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ClassicalEffect:
    space: OutcomeSpace
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (len(self.space),):
            raise DimensionMismatch(
                f"expected {len(self.space)} values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValidationError("classical effect has non-finite values")
        tol = mc.default_tol()
        if vals.min() < -tol or vals.max() > 1 + tol:
            raise ValidationError(
                f"classical effect values must lie in [0, 1], got range "
                f"[{vals.min():.3g}, {vals.max():.3g}]"
            )
        object.__setattr__(self, "values", _frozen(np.clip(vals, 0.0, 1.0)))

    @classmethod
    def from_mapping(cls, space: OutcomeSpace, values: dict) -> ClassicalEffect:
        missing = [x for x in space if x not in values]
        if missing:
            raise ValidationError(f"missing values for labels {missing}")
        extra = [x for x in values if x not in space.labels]
        if extra:
            raise ValidationError(f"values for unknown labels {extra}")
        return cls(space, np.array([values[x] for x in space], dtype=float))

    @classmethod
    def constant(cls, space: OutcomeSpace, c: float) -> ClassicalEffect:
        return cls(space, np.full(len(space), float(c)))

    @classmethod
    def indicator(cls, space: OutcomeSpace, label: str) -> ClassicalEffect:
        vals = np.zeros(len(space))
        vals[space.index(label)] = 1.0
        return cls(space, vals)

    def __call__(self, label: str) -> float:
        return float(self.values[self.space.index(label)])

    def as_dict(self) -> dict[str, float]:
        return {x: float(v) for x, v in zip(self.space, self.values)}


@dataclass(frozen=True, eq=False)
class QuantumEffect:
    operator: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        op = mc.as_matrix(self.operator)
        if op.shape[0] != op.shape[1]:
            raise DimensionMismatch(f"effect operator must be square, got {op.shape}")
        tol = mc.default_tol()
        if not mc.is_hermitian(op, tol):
            raise ValidationError("effect operator is not Hermitian")
        vals = np.linalg.eigvalsh(mc.hermitian_part(op))
        if vals[0] < -tol or vals[-1] > 1 + tol:
            raise ValidationError(
                f"effect spectrum must lie in [0, 1], got [{vals[0]:.3g}, {vals[-1]:.3g}]"
            )
        object.__setattr__(self, "operator", _frozen(op))
        object.__setattr__(self, "dim", op.shape[0])

    @classmethod
    def identity(cls, dim: int) -> QuantumEffect:
        return cls(mc.identity(dim))

    @classmethod
    def zero(cls, dim: int) -> QuantumEffect:
        return cls(np.zeros((dim, dim), dtype=np.complex128))


Effect = Union[ClassicalEffect, QuantumEffect]
# A quantum domain is given by its Hilbert space dimension.
Domain = Union[OutcomeSpace, int]


def effect_array(e: Effect) -> np.ndarray:
    if isinstance(e, ClassicalEffect):
        return e.values
    if isinstance(e, QuantumEffect):
        return e.operator
    raise TypeError(f"not an effect: {type(e).__name__}")


def domain_of(e: Effect) -> Domain:
    return e.space if isinstance(e, ClassicalEffect) else e.dim


def _rebuild(template: Effect, arr: np.ndarray) -> Effect:
    if isinstance(template, ClassicalEffect):
        return ClassicalEffect(template.space, arr)
    return QuantumEffect(arr)


def unit(domain: Domain) -> Effect:
    if isinstance(domain, OutcomeSpace):
        return ClassicalEffect.constant(domain, 1.0)
    return QuantumEffect.identity(int(domain))


def zero(domain: Domain) -> Effect:
    if isinstance(domain, OutcomeSpace):
        return ClassicalEffect.constant(domain, 0.0)
    return QuantumEffect.zero(int(domain))


def _same_domain(a: Effect, b: Effect) -> None:
    if type(a) is not type(b):
        raise DimensionMismatch(f"cannot combine {type(a).__name__} with {type(b).__name__}")
    if domain_of(a) != domain_of(b):
        raise DimensionMismatch(f"effects live on different spaces: {domain_of(a)} vs {domain_of(b)}")


def is_orthogonal(a: Effect, b: Effect, tol: float | None = None) -> bool:
    _same_domain(a, b)
    tol = mc.resolve_tol(tol)
    total = effect_array(a) + effect_array(b)
    if isinstance(a, ClassicalEffect):
        return float(total.max()) <= 1 + tol
    return float(np.linalg.eigvalsh(mc.hermitian_part(total))[-1]) <= 1 + tol


def ovee(a: Effect, b: Effect, tol: float | None = None) -> Effect:
    """Partial sum; raises ``NotOrthogonal`` when ``a + b`` exceeds the unit."""
    if not is_orthogonal(a, b, tol):
        raise NotOrthogonal("sum exceeds the unit, so a ⊕ b is undefined")
    total = effect_array(a) + effect_array(b)
    if isinstance(a, ClassicalEffect):
        return ClassicalEffect(a.space, np.minimum(total, 1.0))
    return QuantumEffect(mc.clip_spectrum(total, -np.inf, 1.0))


def neg(a: Effect) -> Effect:
    return _rebuild(a, effect_array(unit(domain_of(a))) - effect_array(a))


def scalar(r: float, a: Effect) -> Effect:
    r = float(r)
    if not 0.0 <= r <= 1.0:
        raise ValidationError(f"scalar must lie in [0, 1], got {r}")
    return _rebuild(a, r * effect_array(a))


def effect_metric(a: Effect, b: Effect) -> float:
    """Order-theoretic distance between two effects.

    ``inf{r : a <= b + r·1}`` is the largest eigenvalue (or largest pointwise
    value) of ``a - b``, floored at zero; the metric is the larger of the two
    one-sided values.
    """
    _same_domain(a, b)
    diff = effect_array(a) - effect_array(b)
    if isinstance(a, ClassicalEffect):
        up, down = float(diff.max()), float(-diff.min())
    else:
        vals = np.linalg.eigvalsh(mc.hermitian_part(diff))
        up, down = float(vals[-1]), float(-vals[0])
    return min(1.0, max(0.0, up, down))


def random_effect(domain: Domain, rng: np.random.Generator) -> Effect:
    """Random effect: uniform values, or a Haar-rotated uniform spectrum."""
    if isinstance(domain, OutcomeSpace):
        return ClassicalEffect(domain, rng.uniform(0.0, 1.0, len(domain)))
    d = int(domain)
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return QuantumEffect((q * rng.uniform(0.0, 1.0, d)) @ q.conj().T)


@dataclass
class HomReport:
    ok: bool
    max_deviation: float
    samples: int
    violation: str | None = None
    witness: tuple | None = None


def is_effect_module_hom(
    h: Callable[[Effect], Effect],
    domain: Domain,
    samples: int = 50,
    tol: float | None = None,
    seed: int = 0,
    check_unit: bool = True,
) -> HomReport:
    """Probe a black-box map for unit, scalar-action and ⊕ preservation.

    Orthogonal pairs are drawn as ``(r·a, (1-r)·b)``.  Stops at the first
    violation and records the offending triple.  ``check_unit=False`` skips
    the ``h(1) = 1`` test so callers can report non-unital maps separately.
    """
    tol = mc.resolve_tol(tol)
    rng = np.random.default_rng(seed)
    worst = 0.0

    def image(x):
        y = h(x)
        effect_array(y)
        return y

    try:
        one = image(unit(domain))
    except (ValidationError, TypeError) as exc:
        return HomReport(False, float("inf"), 0, f"h(1) is not an effect: {exc}", (unit(domain),))
    dev = mc.max_abs_diff(effect_array(one), effect_array(unit(domain_of(one))))
    if check_unit and dev > tol:
        return HomReport(False, worst, 0, f"h(1) != 1 (deviation {dev:.3g})", (unit(domain),))

    for k in range(samples):
        a, b = random_effect(domain, rng), random_effect(domain, rng)
        r, s = rng.uniform(), rng.uniform()
        x, y = scalar(r, a), scalar(1.0 - r, b)
        try:
            hx, hy, hxy = image(x), image(y), image(ovee(x, y))
            ha, hsa = image(a), image(scalar(s, a))
        except (ValidationError, TypeError) as exc:
            return HomReport(False, float("inf"), k, f"h produced a non-effect: {exc}", (x, y, r))
        dev_add = mc.max_abs_diff(effect_array(hxy), effect_array(hx) + effect_array(hy))
        dev_scale = mc.max_abs_diff(effect_array(hsa), s * effect_array(ha))
        worst = max(worst, dev_add, dev_scale)
        if dev_add > tol:
            return HomReport(
                False, worst, k + 1,
                f"h(x ⊕ y) != h(x) ⊕ h(y) at sample {k} (deviation {dev_add:.3g})", (x, y, r),
            )
        if dev_scale > tol:
            return HomReport(
                False, worst, k + 1,
                f"h(s·a) != s·h(a) at sample {k} (deviation {dev_scale:.3g})", (a, s),
            )
    return HomReport(True, worst, samples)
