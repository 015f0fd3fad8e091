"""Small dense matrix kernels used throughout the package.

Blocks are at most a few dozen rows, so everything goes through numpy/scipy
with explicit positivity and singularity checks on top.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular


class NotPositiveDefinite(np.linalg.LinAlgError):
    """Raised when a Cholesky pivot falls below the relative tolerance."""


class SingularMatrix(np.linalg.LinAlgError):
    """Raised when a triangular solve meets a (near) zero diagonal entry."""


PIVOT_RTOL = 1e-12
DIAG_ATOL = 1e-14


def cholesky_lower(a, rtol: float = PIVOT_RTOL) -> np.ndarray:
    """Lower Cholesky factor ``L`` with ``L @ L.T == a`` and positive diagonal.

    Parameters
    ----------
    a : array_like
        Symmetric square matrix.
    rtol : float
        A pivot ``L[k, k]**2`` at or below ``rtol * max(diag(a))`` is treated
        as a failure of positive definiteness.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.conj().T, rtol=1e-10, atol=1e-14 * max(1.0, np.abs(a).max())):
        raise ValueError("matrix is not symmetric")
    scale = np.max(np.abs(np.diag(a)))
    tol = rtol * scale
    try:
        low = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    pivots = np.abs(np.diag(low)) ** 2
    if scale <= 0 or np.any(pivots <= tol):
        k = int(np.argmin(pivots))
        raise NotPositiveDefinite(f"pivot {k} = {pivots[k]:.3e} below tolerance {tol:.3e}")
    return low


def reverse_cholesky_lower(a) -> np.ndarray:
    """Lower-triangular ``L`` with positive diagonal and ``L.T @ L == a``."""
    a = np.asarray(a)
    flip = a[::-1, ::-1]
    low = cholesky_lower(flip)
    return low[::-1, ::-1].T


def _check_diagonal(t: np.ndarray) -> None:
    d = np.abs(np.diag(t))
    if np.any(d <= DIAG_ATOL):
        raise SingularMatrix(f"diagonal entry {int(np.argmin(d))} has magnitude {d.min():.3e}")


def solve_lower_triangular(low, b) -> np.ndarray:
    """Solve ``low @ X = b`` by forward substitution."""
    low = np.asarray(low)
    _check_diagonal(low)
    return solve_triangular(low, np.asarray(b), lower=True, check_finite=False)


def solve_upper_triangular(up, b) -> np.ndarray:
    """Solve ``up @ X = b`` by back substitution."""
    up = np.asarray(up)
    _check_diagonal(up)
    return solve_triangular(up, np.asarray(b), lower=False, check_finite=False)


def hs_norm(a) -> float:
    """Hilbert-Schmidt (Frobenius) norm ``sqrt(tr(a a^dagger))``."""
    a = np.asarray(a)
    return float(np.sqrt(np.sum(np.abs(a) ** 2)))


def is_lower_triangular(a, positive_diagonal: bool = True, atol: float = 0.0) -> bool:
    a = np.asarray(a)
    if np.any(np.abs(np.triu(a, 1)) > atol):
        return False
    return not positive_diagonal or bool(np.all(np.real(np.diag(a)) > 0))
