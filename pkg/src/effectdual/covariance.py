"""Finite groups, systems of imprimitivity and covariant measurements.

A system ``(U, action, E)`` is covariant when ``U(g) E_x U(g)† = E_{g·x}``.
The same condition is checked three ways: directly on the POVM, on the
quantization map against left translation of classical effects, and on the
measurement map against the shifted outcome distribution.  At finite ``X``
every subset is a disjoint union of points, so singletons are enough.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import matrix_core as mc
from .duality import Povm, measure, quantize
from .effects import ClassicalEffect, OutcomeSpace
from .errors import (
    DimensionMismatch,
    NotTransitive,
    SingularAverage,
    ValidationError,
)
from .states import DensityMatrix, hermitian_frame, random_density


@dataclass(frozen=True)
class FiniteGroup:
    """Group given by its multiplication table; ``table[i][j]`` is the index of ``g_i g_j``."""

    elements: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]
    identity: str
    inverse: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        elements = tuple(self.elements)
        n = len(elements)
        if n == 0 or len(set(elements)) != n:
            raise ValidationError("group elements must be non-empty and distinct")
        table = tuple(tuple(int(v) for v in row) for row in self.table)
        if len(table) != n or any(len(row) != n for row in table):
            raise ValidationError(f"multiplication table must be {n}x{n}")
        if any(not 0 <= v < n for row in table for v in row):
            raise ValidationError("multiplication table is not closed")
        if self.identity not in elements:
            raise ValidationError(f"identity {self.identity!r} is not an element")
        e = elements.index(self.identity)
        for i in range(n):
            if table[e][i] != i or table[i][e] != i:
                raise ValidationError(f"{self.identity!r} is not a two-sided identity")
        inverse = []
        for i in range(n):
            inv = [j for j in range(n) if table[i][j] == e]
            if len(inv) != 1 or table[inv[0]][i] != e:
                raise ValidationError(f"element {elements[i]!r} has no unique inverse")
            inverse.append(inv[0])
        for i, j, k in itertools.product(range(n), repeat=3):
            if table[table[i][j]][k] != table[i][table[j][k]]:
                raise ValidationError(
                    f"table is not associative at ({elements[i]}, {elements[j]}, {elements[k]})"
                )
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "inverse", tuple(inverse))

    @classmethod
    def from_label_table(cls, elements, table, identity) -> FiniteGroup:
        index = {g: i for i, g in enumerate(elements)}
        try:
            rows = tuple(tuple(index[v] for v in row) for row in table)
        except KeyError as exc:
            raise ValidationError(f"table entry {exc.args[0]!r} is not an element") from None
        return cls(tuple(elements), rows, identity)

    @property
    def order(self) -> int:
        return len(self.elements)

    def index(self, g: str) -> int:
        try:
            return self.elements.index(g)
        except ValueError:
            raise KeyError(f"unknown group element {g!r}") from None

    def mul(self, g: str, h: str) -> str:
        return self.elements[self.table[self.index(g)][self.index(h)]]

    def inv(self, g: str) -> str:
        return self.elements[self.inverse[self.index(g)]]

    def label_table(self) -> list[list[str]]:
        return [[self.elements[v] for v in row] for row in self.table]


def cyclic_group(n: int) -> FiniteGroup:
    labels = tuple(str(i) for i in range(n))
    return FiniteGroup(labels, tuple(tuple((i + j) % n for j in range(n)) for i in range(n)), "0")


def symmetric_group(n: int) -> FiniteGroup:
    """Permutations in one-line notation, composed as ``(s·t)(k) = s(t(k))``."""
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = tuple(tuple(index[tuple(s[t[k]] for k in range(n))] for t in perms) for s in perms)
    labels = tuple("".join(map(str, p)) for p in perms)
    return FiniteGroup(labels, table, labels[0])


def dihedral_group(n: int) -> FiniteGroup:
    """``r{k}`` is rotation by ``k``; ``s{k}`` is ``r^k s`` with ``s r s = r^{-1}``."""
    elems = [(k, 0) for k in range(n)] + [(k, 1) for k in range(n)]

    def mul(a, b):
        (ka, ma), (kb, mb) = a, b
        return ((ka + (kb if ma == 0 else -kb)) % n, ma ^ mb)

    index = {g: i for i, g in enumerate(elems)}
    table = tuple(tuple(index[mul(a, b)] for b in elems) for a in elems)
    labels = tuple(("r" if m == 0 else "s") + str(k) for k, m in elems)
    return FiniteGroup(labels, table, "r0")


@dataclass(frozen=True)
class GroupAction:
    """Left action; ``perm[g][x]`` is the index of ``g·x``."""

    group: FiniteGroup
    space: OutcomeSpace
    perm: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n, m = self.group.order, len(self.space)
        perm = tuple(tuple(int(v) for v in row) for row in self.perm)
        if len(perm) != n or any(sorted(row) != list(range(m)) for row in perm):
            raise ValidationError("each group element must act as a permutation of the space")
        e = self.group.index(self.group.identity)
        if perm[e] != tuple(range(m)):
            raise ValidationError("identity does not act trivially")
        for g, h in itertools.product(range(n), repeat=2):
            gh = self.group.table[g][h]
            if any(perm[gh][x] != perm[g][perm[h][x]] for x in range(m)):
                raise ValidationError(
                    f"action is not compatible with multiplication at "
                    f"({self.group.elements[g]}, {self.group.elements[h]})"
                )
        object.__setattr__(self, "perm", perm)

    @classmethod
    def from_map(cls, group: FiniteGroup, space: OutcomeSpace, mapping: dict) -> GroupAction:
        rows = []
        for g in group.elements:
            if g not in mapping:
                raise ValidationError(f"action map has no entry for element {g!r}")
            try:
                rows.append(tuple(space.index(mapping[g][x]) for x in space))
            except KeyError as exc:
                raise ValidationError(f"action map for {g!r} is incomplete: {exc}") from None
        return cls(group, space, tuple(rows))

    def as_map(self) -> dict[str, dict[str, str]]:
        return {
            g: {x: self.space.labels[self.perm[i][j]] for j, x in enumerate(self.space)}
            for i, g in enumerate(self.group.elements)
        }

    def act(self, g: str, x: str) -> str:
        return self.space.labels[self.perm[self.group.index(g)][self.space.index(x)]]

    def is_transitive(self) -> bool:
        return len({row[0] for row in self.perm}) == len(self.space)


def regular_action(group: FiniteGroup) -> GroupAction:
    """Left multiplication of a group on its own elements."""
    return GroupAction(group, OutcomeSpace(group.elements), group.table)


def natural_action(group: FiniteGroup, n: int) -> GroupAction:
    """``S_n`` (one-line labels) acting on the points ``"0" .. "n-1"``."""
    rows = tuple(tuple(int(c) for c in g) for g in group.elements)
    return GroupAction(group, OutcomeSpace.of_size(n), rows)


def polygon_action(group: FiniteGroup, n: int) -> GroupAction:
    """Dihedral group (labels as in ``dihedral_group``) on the vertices of an ``n``-gon."""
    rows = []
    for g in group.elements:
        k, refl = int(g[1:]), g[0] == "s"
        rows.append(tuple(((-x if refl else x) + k) % n for x in range(n)))
    return GroupAction(group, OutcomeSpace.of_size(n), tuple(rows))


@dataclass(frozen=True, eq=False)
class UnitaryRepresentation:
    group: FiniteGroup
    matrices: tuple[np.ndarray, ...]
    dim: int = field(init=False)

    def __post_init__(self):
        mats = tuple(mc.as_matrix(u) for u in self.matrices)
        if len(mats) != self.group.order:
            raise ValidationError(f"need {self.group.order} matrices, got {len(mats)}")
        d = mats[0].shape[0]
        if any(u.shape != (d, d) for u in mats):
            raise DimensionMismatch("representation matrices must share one square shape")
        tol = mc.default_tol()
        for g, u in zip(self.group.elements, mats):
            if not mc.is_unitary(u, tol):
                raise ValidationError(f"U({g}) is not unitary")
        e = self.group.index(self.group.identity)
        if mc.max_abs_diff(mats[e], mc.identity(d)) > tol:
            raise ValidationError("U(identity) is not the identity matrix")
        n = self.group.order
        for g, h in itertools.product(range(n), repeat=2):
            dev = mc.max_abs_diff(mats[self.group.table[g][h]], mats[g] @ mats[h])
            if dev > tol:
                raise ValidationError(
                    f"U(gh) != U(g)U(h) at ({self.group.elements[g]}, {self.group.elements[h]})"
                )
        for u in mats:
            u.setflags(write=False)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "dim", d)

    def __call__(self, g: str) -> np.ndarray:
        return self.matrices[self.group.index(g)]


def permutation_representation(action: GroupAction) -> UnitaryRepresentation:
    """``U(g)|x> = |g·x>``; for a cyclic group on itself this is the shift."""
    m = len(action.space)
    mats = []
    for row in action.perm:
        u = np.zeros((m, m), dtype=np.complex128)
        u[list(row), list(range(m))] = 1.0
        mats.append(u)
    return UnitaryRepresentation(action.group, tuple(mats))


def standard_representation(action: GroupAction) -> UnitaryRepresentation:
    """Permutation representation restricted to the complement of the all-ones vector.

    For ``S_3`` on three points this is the two-dimensional irreducible
    representation.
    """
    perm = permutation_representation(action)
    m = perm.dim
    ones = np.ones((m, 1)) / np.sqrt(m)
    q, _ = np.linalg.qr(np.hstack([ones, np.eye(m)[:, : m - 1]]))
    basis = q[:, 1:]
    return UnitaryRepresentation(
        action.group, tuple(basis.conj().T @ u @ basis for u in perm.matrices)
    )


@dataclass(frozen=True, eq=False)
class ImprimitivitySystem:
    rep: UnitaryRepresentation
    action: GroupAction
    povm: Povm

    def __post_init__(self):
        if self.rep.group != self.action.group:
            raise ValidationError("representation and action use different groups")
        if self.povm.space != self.action.space:
            raise DimensionMismatch("POVM outcome space differs from the G-space")
        if self.povm.dim != self.rep.dim:
            raise DimensionMismatch(f"POVM dim {self.povm.dim} != representation dim {self.rep.dim}")


def left_translate(g: str, f: ClassicalEffect, action: GroupAction) -> ClassicalEffect:
    """``(L_g f)(x) = f(g^{-1}·x)``."""
    if f.space != action.space:
        raise DimensionMismatch("classical effect lives on a different space than the action")
    g_inv = action.group.inverse[action.group.index(g)]
    return ClassicalEffect(f.space, f.values[list(action.perm[g_inv])])


def conjugate(u: np.ndarray, a: np.ndarray) -> np.ndarray:
    """``U a U^{-1}`` for unitary ``U``."""
    return u @ a @ u.conj().T


@dataclass
class CovarianceReport:
    check: str
    passed: bool
    max_deviation: float
    tol: float
    witness: tuple | None = None
    violations: list[tuple[str, str]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "pass": bool(self.passed),
            "max_deviation": float(self.max_deviation),
            "tol": self.tol,
            "witness": [str(w) if not isinstance(w, int) else w for w in self.witness]
            if self.witness
            else None,
            "violations": [list(v) for v in self.violations],
        }


def _report(check, tol, worst, witness, violations) -> CovarianceReport:
    passed = not violations and worst <= tol
    return CovarianceReport(check, passed, float(worst), tol, witness, sorted(violations))


def check_imprimitivity(sys: ImprimitivitySystem, tol: float | None = None) -> CovarianceReport:
    """``U(g) E_x U(g)^{-1} = E_{g·x}`` for every ``g`` and every point ``x``."""
    tol = mc.resolve_tol(tol)
    group, action, ops = sys.rep.group, sys.action, sys.povm.operators
    worst, witness, violations = 0.0, None, set()
    for gi, g in enumerate(group.elements):
        u = sys.rep.matrices[gi]
        for xi, x in enumerate(action.space):
            dev = mc.max_abs_diff(conjugate(u, ops[xi]), ops[action.perm[gi][xi]])
            if dev > worst or witness is None:
                worst, witness = max(worst, dev), (g, x)
            if dev > tol:
                violations.add((g, x))
    return _report("imprimitivity", tol, worst, witness, violations)


def check_q_covariance(
    sys: ImprimitivitySystem, trials: int = 20, tol: float | None = None, seed: int = 0
) -> CovarianceReport:
    """``U(g) Q(f) U(g)^{-1} = Q(L_g f)`` on all indicators plus ``trials`` random ``f``.

    A failure on the indicator of ``x`` is reported as the pair ``(g, x)``.
    """
    tol = mc.resolve_tol(tol)
    rng = np.random.default_rng(seed)
    space = sys.action.space
    probes = [(x, ClassicalEffect.indicator(space, x)) for x in space]
    probes += [(f"random#{k}", ClassicalEffect(space, rng.uniform(size=len(space)))) for k in range(trials)]
    worst, witness, violations = 0.0, None, set()
    for gi, g in enumerate(sys.rep.group.elements):
        u = sys.rep.matrices[gi]
        for name, f in probes:
            lhs = conjugate(u, quantize(sys.povm, f).operator)
            rhs = quantize(sys.povm, left_translate(g, f, sys.action)).operator
            dev = mc.max_abs_diff(lhs, rhs)
            if dev > worst or witness is None:
                worst, witness = max(worst, dev), (g, name)
            if dev > tol:
                violations.add((g, name))
    return _report("q_covariance", tol, worst, witness, violations)


def check_covariant_measurement(
    sys: ImprimitivitySystem, trials: int = 20, tol: float | None = None, seed: int = 0
) -> CovarianceReport:
    """``Tr[rho E_{g·x}] = Tr[rho U(g) E_x U(g)^{-1}]`` on a state frame plus random states.

    Evaluated as the dual square: the measured distribution shifted by ``g``
    against the measurement of ``U(g)^{-1} rho U(g)``.
    """
    tol = mc.resolve_tol(tol)
    rng = np.random.default_rng(seed)
    dim = sys.rep.dim
    states = [DensityMatrix(p) for p in hermitian_frame(dim)]
    states += [random_density(dim, rng) for _ in range(trials)]
    space = sys.action.space
    worst, witness, violations = 0.0, None, set()
    for gi, g in enumerate(sys.rep.group.elements):
        u = sys.rep.matrices[gi]
        shift = list(sys.action.perm[gi])
        for k, rho in enumerate(states):
            lhs = measure(sys.povm, rho).weights[shift]
            rhs = measure(sys.povm, DensityMatrix(u.conj().T @ rho.operator @ u)).weights
            devs = np.abs(lhs - rhs)
            xi = int(np.argmax(devs))
            if devs[xi] > worst or witness is None:
                worst, witness = max(worst, float(devs[xi])), (g, space.labels[xi], k)
            for xj in np.flatnonzero(devs > tol):
                violations.add((g, space.labels[xj]))
    return _report("covariant_measurement", tol, worst, witness, violations)


@dataclass
class TriangleVerdict:
    imprimitivity: CovarianceReport
    q_covariance: CovarianceReport
    measurement: CovarianceReport

    @property
    def agree(self) -> bool:
        return self.imprimitivity.passed == self.q_covariance.passed == self.measurement.passed

    @property
    def passed(self) -> bool:
        return self.agree and self.imprimitivity.passed

    def to_json(self) -> dict:
        return {
            "agree": bool(self.agree),
            "pass": bool(self.passed),
            "imprimitivity": self.imprimitivity.to_json(),
            "q_covariance": self.q_covariance.to_json(),
            "covariant_measurement": self.measurement.to_json(),
        }


def covariance_triangle(
    sys: ImprimitivitySystem, trials: int = 20, tol: float | None = None, seed: int = 0
) -> TriangleVerdict:
    """Run all three equivalent covariance checks."""
    return TriangleVerdict(
        check_imprimitivity(sys, tol),
        check_q_covariance(sys, trials, tol, seed),
        check_covariant_measurement(sys, trials, tol, seed),
    )


def build_covariant_povm(
    rep: UnitaryRepresentation,
    action: GroupAction,
    seed_effect,
    tol: float | None = None,
) -> Povm:
    """Covariant POVM by group-averaging a seed over a transitive action.

    ``Ẽ_x = sum_{g·x0 = x} U(g) seed U(g)†`` with ``x0`` the first point;
    ``S = sum_x Ẽ_x`` commutes with the representation, so
    ``E_x = S^{-1/2} Ẽ_x S^{-1/2}`` is a covariant POVM.
    """
    tol = mc.resolve_tol(tol)
    if rep.group != action.group:
        raise ValidationError("representation and action use different groups")
    if not action.is_transitive():
        raise NotTransitive("covariant construction needs a transitive action")
    seed = mc.as_matrix(seed_effect)
    if seed.shape != (rep.dim, rep.dim):
        raise DimensionMismatch(f"seed must be {rep.dim}x{rep.dim}, got {seed.shape}")
    if not mc.is_psd(seed, tol) or np.max(np.abs(seed)) <= tol:
        raise ValidationError("seed must be positive semidefinite and nonzero")
    seed = mc.hermitian_part(seed)
    tilde = np.zeros((len(action.space), rep.dim, rep.dim), dtype=np.complex128)
    for gi, u in enumerate(rep.matrices):
        tilde[action.perm[gi][0]] += conjugate(u, seed)
    inv_sqrt = mc.psd_inverse_sqrt(tilde.sum(axis=0), tol)
    if inv_sqrt is None:
        raise SingularAverage("group average of the seed is singular; its orbit does not span")
    return Povm(action.space, tuple(mc.hermitian_part(inv_sqrt @ t @ inv_sqrt) for t in tilde))
