"""Small input-validation helpers used by every module."""

import numpy as np

from .errors import DimensionMismatchError, NonFiniteValueError, ShapeMismatchError


def as_matrix(a, name="array"):
    """Coerce to a finite float64 2-D array."""
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise ShapeMismatchError(f"{name} must be 2-D, got ndim={out.ndim}")
    if not np.all(np.isfinite(out)):
        raise NonFiniteValueError(f"{name} contains non-finite entries")
    return out


def as_vector(a, name="vector"):
    """Coerce to a finite float64 1-D array."""
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 1:
        raise ShapeMismatchError(f"{name} must be 1-D, got ndim={out.ndim}")
    if not np.all(np.isfinite(out)):
        raise NonFiniteValueError(f"{name} contains non-finite entries")
    return out


def check_square(a, name="matrix"):
    if a.shape[0] != a.shape[1]:
        raise ShapeMismatchError(f"{name} must be square, got {a.shape}")


def check_same_length(a, b, name_a="a", name_b="b"):
    if a.shape != b.shape:
        raise DimensionMismatchError(
            f"{name_a} and {name_b} must have the same shape, "
            f"got {a.shape} vs {b.shape}"
        )
