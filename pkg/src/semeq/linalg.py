"""Dense symmetric linear algebra kernels.

Thin wrappers over LAPACK (through numpy/scipy) that pin down the error
contracts and the rank convention the rest of the package relies on.
All computation is float64 regardless of input dtype.
"""

import numpy as np
import scipy.linalg

from .errors import (
    AllZeroError,
    NotPositiveDefiniteError,
    NotSymmetricError,
    ShapeMismatchError,
)
from .validation import as_matrix, check_square

# Relative symmetry tolerance for inputs that must be symmetric.
SYMMETRY_RTOL = 1e-10
# Eigenvalues below RANK_CUTOFF * max eigenvalue count as zero rank.
RANK_CUTOFF = 1e-10


def symmetrize(a):
    """(A + A^T) / 2; output is symmetric bit-for-bit."""
    a = as_matrix(a, "a")
    check_square(a, "a")
    return (a + a.T) / 2.0


def matmul(a, b):
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def gram(x):
    """X X^T, symmetrized to remove round-off skew."""
    x = as_matrix(x, "x")
    p = x @ x.T
    return (p + p.T) / 2.0


def _require_symmetric(a, name):
    scale = np.max(np.abs(a))
    if scale == 0.0:
        return
    if np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * scale:
        raise NotSymmetricError(f"{name} is not symmetric within {SYMMETRY_RTOL:g} relative")


def spd_solve(a, b):
    """Solve A X = B for symmetric positive-definite A via Cholesky.

    One step of iterative refinement keeps the relative residual near
    machine precision for well-conditioned systems.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    check_square(a, "a")
    _require_symmetric(a, "a")
    if b.shape[0] != a.shape[0]:
        raise ShapeMismatchError(f"b has {b.shape[0]} rows, expected {a.shape[0]}")
    try:
        factor = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from exc
    x = scipy.linalg.cho_solve(factor, b, check_finite=False)
    # refinement: r = B - A X is cheap and buys ~2 digits on tough systems
    x = x + scipy.linalg.cho_solve(factor, b - a @ x, check_finite=False)
    return x


def spd_inv_sqrt(a):
    """Inverse square root of a symmetric positive-semidefinite matrix.

    Uses a symmetric eigendecomposition. Eigenvalues below
    RANK_CUTOFF * lambda_max are treated as exact zeros and pseudo-inverted
    to zero, so on a rank-deficient input the result acts as the inverse
    square root on the range and as zero on the null space.
    """
    a = as_matrix(a, "a")
    check_square(a, "a")
    _require_symmetric(a, "a")
    w, v = np.linalg.eigh((a + a.T) / 2.0)
    lmax = float(w[-1])
    if lmax <= 0.0:
        raise AllZeroError("matrix is numerically zero or negative semidefinite")
    if float(w[0]) < -1e-12 * lmax:
        raise NotPositiveDefiniteError(
            f"eigenvalue {w[0]:g} is too negative for a PSD matrix (max {lmax:g})"
        )
    cutoff = RANK_CUTOFF * lmax
    inv_root = np.where(w > cutoff, 1.0 / np.sqrt(np.maximum(w, cutoff)), 0.0)
    s = (v * inv_root) @ v.T
    return (s + s.T) / 2.0
