"""
Dense complex linear-algebra kernel.

Vectorization is row-major: ``vec(M) = (M11, ..., M1N, M21, ..., MNN)``, so
``vec(A @ X @ B) == kron(A, B.T) @ vec(X)``. Left multiplication maps to
``A (x) I`` and right multiplication to ``I (x) A^T``.
"""

import logging
from typing import NamedTuple

import numpy as np
import numpy.typing as npt
import scipy.linalg

from kaon_bell.errors import DimensionError, InvalidStateError, NotHermitianError

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]

HERMITIAN_TOL = 1e-10


class Spectrum(NamedTuple):
    """Eigenvalues sorted ascending with matching eigenvector columns."""

    eigenvalues: npt.NDArray[np.float64]
    eigenvectors: ComplexMatrix


def as_matrix(a: npt.ArrayLike) -> ComplexMatrix:
    """Coerce to a 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionError(f"Expected a matrix, got array with shape {m.shape}")
    return m


def _require_square(m: ComplexMatrix, what: str) -> int:
    rows, cols = m.shape
    if rows != cols:
        raise DimensionError(f"{what} requires a square matrix, got {rows}x{cols}")
    return rows


def dagger(m: npt.ArrayLike) -> ComplexMatrix:
    return as_matrix(m).conj().T


def is_hermitian(m: npt.ArrayLike, tol: float = HERMITIAN_TOL) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def hermitize(m: npt.ArrayLike) -> ComplexMatrix:
    """Return (M + M^dagger)/2."""
    m = as_matrix(m)
    return 0.5 * (m + m.conj().T)


def kron(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexMatrix:
    return np.kron(as_matrix(a), as_matrix(b))


def vec(m: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """Row-major vectorization of a square matrix into a flat length-N^2 vector."""
    m = as_matrix(m)
    _require_square(m, "vec")
    return m.reshape(-1).copy()


def unvec(v: npt.ArrayLike, n: int) -> ComplexMatrix:
    """Inverse of :func:`vec`."""
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.size != n * n:
        raise DimensionError(f"Cannot reshape vector of length {v.size} into {n}x{n}")
    return v.reshape(n, n).copy()


def expm(a: npt.ArrayLike) -> ComplexMatrix:
    """Matrix exponential by scaling and squaring with a Pade approximant.

    Liouvillians are generally non-normal, so no eigendecomposition is used.
    """
    a = as_matrix(a)
    _require_square(a, "expm")
    if not np.all(np.isfinite(a)):
        raise InvalidStateError("expm received non-finite entries")
    return scipy.linalg.expm(a)


def eig_hermitian(m: npt.ArrayLike, tol: float = HERMITIAN_TOL) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix after symmetrization."""
    m = as_matrix(m)
    _require_square(m, "eig_hermitian")
    defect = float(np.max(np.abs(m - m.conj().T), initial=0.0))
    if defect > tol:
        raise NotHermitianError(f"Matrix is not Hermitian (max |M - M^dagger| = {defect:.3e})")
    eigenvalues, eigenvectors = scipy.linalg.eigh(hermitize(m))
    return Spectrum(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def projector(psi: npt.ArrayLike) -> ComplexMatrix:
    """|psi><psi| for a (not necessarily normalized) state vector."""
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    return np.outer(psi, psi.conj())


def freeze(m: np.ndarray) -> np.ndarray:
    """Mark an array read-only so it can live inside immutable records."""
    m.setflags(write=False)
    return m
