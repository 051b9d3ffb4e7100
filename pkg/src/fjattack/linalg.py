"""Dense linear-algebra helpers with explicit conditioning checks.

All fixed-point computations in this package reduce to solving small dense
systems of the form (I - D W) z = b.  Rather than calling a bare solver we
LU-factor once, estimate the reciprocal condition number with the LAPACK
gecon routine, and refuse to return an answer from a system whose rcond
falls below ``RCOND_MIN``.  Silent garbage from a nearly singular solve is
much harder to debug than an early ConvergenceError.
"""

import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, get_lapack_funcs, lu_factor, lu_solve

from .errors import ConvergenceError

# Reciprocal-condition-number floor below which a solve is rejected.
RCOND_MIN = 1e-12


def factor_conditioned(matrix):
    """LU-factor a square matrix, rejecting ill-conditioned input.

    Returns the ``(lu, piv)`` pair accepted by ``scipy.linalg.lu_solve``.
    Raises ConvergenceError when the 1-norm reciprocal condition estimate
    is below RCOND_MIN (this covers exactly singular input as well).
    """
    a = np.ascontiguousarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    anorm = np.linalg.norm(a, 1)
    with warnings.catch_warnings():
        # Exactly singular input makes lu_factor warn; the rcond check below
        # turns that case into a ConvergenceError, so the warning is noise.
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(a)
    gecon = get_lapack_funcs(("gecon",), (a,))[0]
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0:
        raise ConvergenceError(f"condition estimate failed (info={info})")
    if not rcond > RCOND_MIN:
        raise ConvergenceError(
            f"system is singular or ill-conditioned (rcond={rcond:.3e})"
        )
    return lu, piv


def solve_conditioned(matrix, rhs, transposed=False):
    """Solve ``matrix @ x = rhs`` (or the transposed system) with an rcond guard."""
    factor = factor_conditioned(matrix)
    return lu_solve(factor, np.asarray(rhs, dtype=float), trans=1 if transposed else 0)


def spectral_radius(matrix, max_iterations=2000, tol=1e-13):
    """Spectral radius of an entrywise nonnegative matrix by power iteration.

    Nonnegativity makes the all-ones start vector safe (it cannot be
    orthogonal to the dominant eigenvector).  Convergence is declared when
    the radius estimate stops moving; the final estimate is returned even
    if the iteration cap is hit, which for our contraction checks only
    errs on the conservative side.
    """
    a = np.asarray(matrix, dtype=float)
    n = a.shape[0]
    if n == 0:
        return 0.0
    v = np.full(n, 1.0 / n)
    estimate = 0.0
    for _ in range(max_iterations):
        w = a @ v
        norm = float(np.max(np.abs(w)))
        if norm == 0.0:
            return 0.0
        w /= norm
        if abs(norm - estimate) <= tol * max(1.0, norm):
            return norm
        estimate = norm
        v = w
    return estimate
