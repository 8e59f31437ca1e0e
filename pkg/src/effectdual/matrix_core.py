"""Dense complex matrix utilities.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Every function
here is pure: inputs are never modified in place.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import DimensionMismatch, NotHermitian, ValidationError

DEFAULT_TOL = 1e-9
TOL_ENV_VAR = "EFFECTDUAL_TOL"


def default_tol() -> float:
    """Default tolerance, overridable through ``EFFECTDUAL_TOL``."""
    raw = os.environ.get(TOL_ENV_VAR)
    if raw is None or raw.strip() == "":
        return DEFAULT_TOL
    try:
        value = float(raw)
    except ValueError:
        raise ValidationError(f"{TOL_ENV_VAR}={raw!r} is not a number") from None
    return resolve_tol(value)


def resolve_tol(tol: float | None) -> float:
    if tol is None:
        return default_tol()
    tol = float(tol)
    if not np.isfinite(tol) or tol < 0:
        raise ValidationError(f"tolerance must be a finite non-negative number, got {tol}")
    return tol


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionMismatch(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    return m


def _square(a) -> np.ndarray:
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


def multiply(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def is_hermitian(a, tol: float | None = None) -> bool:
    m = _square(a)
    return float(np.max(np.abs(m - m.conj().T))) <= resolve_tol(tol)


def hermitian_part(a) -> np.ndarray:
    m = _square(a)
    return 0.5 * (m + m.conj().T)


def hermitian_eigh(a, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    The input is symmetrized to ``(a + a†)/2`` first, so anything within
    ``tol`` of Hermitian is accepted.
    """
    if not is_hermitian(a, tol):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    return np.linalg.eigh(hermitian_part(a))


def hermitian_eigenvalues(a, tol: float | None = None) -> np.ndarray:
    return hermitian_eigh(a, tol)[0]


def is_psd(a, tol: float | None = None) -> bool:
    tol = resolve_tol(tol)
    m = _square(a)
    if not is_hermitian(m, tol):
        return False
    # eigenvalues in [-tol, 0) count as zero
    return float(np.linalg.eigvalsh(hermitian_part(m))[0]) >= -tol


def is_unitary(a, tol: float | None = None) -> bool:
    m = _square(a)
    return float(np.max(np.abs(m.conj().T @ m - identity(m.shape[0])))) <= resolve_tol(tol)


def tensor(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(a, dims: tuple[int, int], over: str = "K") -> np.ndarray:
    """Trace out one factor of an operator on ``H ⊗ K`` (system first).

    ``over="K"`` keeps the ``H`` factor, ``over="H"`` keeps ``K``.
    """
    d_h, d_k = (int(d) for d in dims)
    m = _square(a)
    if d_h < 1 or d_k < 1 or m.shape[0] != d_h * d_k:
        raise DimensionMismatch(f"shape {m.shape} does not factor as {d_h}x{d_k}")
    t = m.reshape(d_h, d_k, d_h, d_k)
    if over == "K":
        return np.einsum("ijkj->ik", t)
    if over == "H":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"over must be 'H' or 'K', got {over!r}")


def operator_norm_distance(a, b, tol: float | None = None) -> float:
    a, b = _square(a), _square(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    vals = hermitian_eigenvalues(a - b, tol)
    return float(max(abs(vals[0]), abs(vals[-1])))


def max_abs_diff(a, b) -> float:
    """Entry-wise max distance, the comparison used throughout the checks."""
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def psd_inverse_sqrt(s, tol: float | None = None) -> np.ndarray | None:
    """``s^{-1/2}`` for a positive definite ``s``; ``None`` when ``s`` is singular.

    Singular means the smallest eigenvalue is at most ``tol`` times the largest.
    """
    tol = resolve_tol(tol)
    vals, vecs = hermitian_eigh(s, max(tol, 1e-12 * float(np.max(np.abs(s)))))
    if vals[-1] <= 0 or vals[0] <= tol * vals[-1]:
        return None
    return (vecs / np.sqrt(vals)) @ vecs.conj().T


def clip_spectrum(a, lo: float, hi: float) -> np.ndarray:
    """Project a Hermitian matrix onto ``lo <= a <= hi`` by clipping eigenvalues."""
    vals, vecs = np.linalg.eigh(hermitian_part(a))
    if vals[0] >= lo and vals[-1] <= hi:
        return as_matrix(a)
    return (vecs * np.clip(vals, lo, hi)) @ vecs.conj().T
