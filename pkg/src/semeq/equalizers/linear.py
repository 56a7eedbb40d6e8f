"""Closed-form linear post-aligner.

Fits the matrix F minimizing

    (1/N) ||Y - F Xt||_F^2 + noise_var * ||F||_F^2

over pilot pairs, where Xt holds the (optionally fading-scaled) transmitted
latents column-wise and ``noise_var`` is the channel noise variance per
real dimension. The minimizer solves the regularized normal equations

    F (Xt Xt^T + N * noise_var * I) = Y Xt^T.

With zero noise and fewer pilots than dimensions the normal matrix is
singular; a relative jitter is added and the fit is flagged rank-deficient
rather than failing.
"""

import numpy as np
from sklearn.base import TransformerMixin

from ..channel import fading_rotate
from ..errors import (
    DimensionMismatchError,
    EmptyPilotSetError,
    NotPositiveDefiniteError,
    ValidationError,
)
from ..linalg import spd_solve
from ..validation import as_matrix
from .base import Equalizer


class LinearEqualizer(TransformerMixin, Equalizer):
    """Least-squares linear aligner with an analytic noise penalty.

    Parameters
    ----------
    noise_var : float
        Channel noise variance per real dimension at the alignment SNR
        (``channel.real_noise_var(snr_db)``); 0 for a noiseless fit.
    jitter : float
        Relative ridge added when the normal matrix is singular.
    """

    arch = "linear"

    def __init__(self, noise_var=0.0, jitter=1e-10):
        self.noise_var = noise_var
        self.jitter = jitter

    def fit(self, X, y, fading=None):
        if self.noise_var < 0:
            raise ValidationError("noise_var must be non-negative")
        X = as_matrix(X, "X")
        y = as_matrix(y, "y")
        if X.shape[0] == 0:
            raise EmptyPilotSetError("no pilots")
        if y.shape[0] != X.shape[0]:
            raise DimensionMismatchError("X and y must have the same number of rows")
        if fading is not None:
            X = fading_rotate(X, fading)
        n, d = X.shape
        xt = X.T  # (d, N), pilots column-wise
        normal = xt @ X
        normal = (normal + normal.T) / 2.0 + (n * self.noise_var) * np.eye(d)
        rhs = xt @ y  # (d, m)
        self.rank_deficient_ = False
        try:
            sol = spd_solve(normal, rhs)
        except NotPositiveDefiniteError:
            lam_max = float(np.linalg.eigvalsh(normal)[-1])
            if lam_max <= 0:
                lam_max = 1.0
            sol = spd_solve(normal + self.jitter * lam_max * np.eye(d), rhs)
            self.rank_deficient_ = True
        self.matrix_ = sol.T  # (m, d)
        self.n_features_in_ = d
        return self

    def transform(self, X):
        self._check_fitted("matrix_")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim > 2:
            X = X.reshape(X.shape[0], -1)
        X = as_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatchError(
                f"input has {X.shape[1]} features, equalizer expects {self.n_features_in_}"
            )
        return X @ self.matrix_.T

    def objective(self, X, y, fading=None, matrix=None):
        """Value of the fit criterion at ``matrix`` (default: the fitted F)."""
        X = as_matrix(X, "X")
        y = as_matrix(y, "y")
        if fading is not None:
            X = fading_rotate(X, fading)
        f = self.matrix_ if matrix is None else np.asarray(matrix, dtype=np.float64)
        resid = y - X @ f.T
        n = X.shape[0]
        return float(np.sum(resid * resid) / n + self.noise_var * np.sum(f * f))
