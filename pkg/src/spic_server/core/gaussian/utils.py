import numpy as np

from ...config.config import DEFAULT_TOLERANCES, Tolerances
from ...errors import CovarianceError


def frozen(array) -> np.ndarray:
    """Float64 copy of ``array`` that cannot be written to."""
    out = np.array(array, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def psd_floor(matrix: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Smallest eigenvalue still accepted as positive semidefinite."""
    n = matrix.shape[0]
    if n == 0:
        return 0.0
    return -tol.psd * (1.0 + float(np.trace(matrix)) / n)


def check_covariance(matrix: np.ndarray, what: str, tol: Tolerances = DEFAULT_TOLERANCES) -> None:
    """
    Raise CovarianceError unless ``matrix`` is square, symmetric and PSD.

    Symmetry is judged on the largest absolute entry of Q - Q^T, PSD on the
    smallest eigenvalue against a trace-scaled slack.
    """
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise CovarianceError(f"{what}: covariance must be square, got shape {matrix.shape}")
    if matrix.shape[0] == 0:
        return
    if not np.all(np.isfinite(matrix)):
        raise CovarianceError(f"{what}: covariance has non-finite entries")
    asym = float(np.max(np.abs(matrix - matrix.T)))
    if asym > tol.symmetry:
        raise CovarianceError(f"{what}: covariance is not symmetric (max |Q - Q'| = {asym:.3g})")
    smallest = float(np.linalg.eigvalsh(symmetrize(matrix))[0])
    if smallest < psd_floor(matrix, tol):
        raise CovarianceError(f"{what}: covariance is not positive semidefinite (min eigenvalue {smallest:.3g})")


def is_positive_definite(matrix: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Trace-scaled positive definiteness test used before any Schur complement."""
    if matrix.shape[0] == 0:
        return True
    scale = float(np.trace(matrix))
    if scale <= 0.0:
        return False
    return float(np.linalg.eigvalsh(symmetrize(matrix))[0]) > tol.degeneracy * scale
