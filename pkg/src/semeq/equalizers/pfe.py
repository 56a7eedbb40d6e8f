"""Zero-shot frame-based equalizer.

Both sides hold an ordered reference set encoded in their private latent
spaces: raw matrices Gt (M x d, transmitter) and Ft (M x m, receiver) whose
n-th rows describe the same underlying sample. Normalizing

    G = Gt (Gt^T Gt)^{-1/2},    F = Ft (Ft^T Ft)^{-1/2}

gives operators with orthonormal columns (G^T G = I when Gt has full
column rank), so the analysis projection c = G x is norm-preserving and
qualifies as the transmitter-side pre-aligner. The receiver reconstructs
with the synthesis adjoint y = F^T c. No pilots are optimized and nothing
depends on the channel noise level.

With fewer references than dimensions (M < d) the operators stay perfectly
conditioned on their spanned subspaces: the inverse square root
pseudo-inverts to zero on the null space, and the round trip becomes the
orthogonal projection onto the span.
"""

import numpy as np

from ..errors import DegenerateReferencesError, DimensionMismatchError, ValidationError, AllZeroError
from ..linalg import spd_inv_sqrt
from ..validation import as_matrix
from .base import Equalizer


class PfeEqualizer(Equalizer):
    """Parseval-frame aligner built from paired reference encodings.

    ``fit(X, y)`` takes the raw reference encodings (rows index-aligned
    across the two spaces); the frame size M must be even so coefficient
    vectors can transit the complex channel.
    """

    arch = "pfe"

    def __init__(self):
        pass

    def fit(self, X, y):
        gt = as_matrix(X, "tx references")
        ft = as_matrix(y, "rx references")
        if gt.shape[0] != ft.shape[0]:
            raise DimensionMismatchError("reference sets must have equal row counts")
        m_refs = gt.shape[0]
        if m_refs < 1:
            raise ValidationError("need at least one reference pair")
        if m_refs % 2 != 0:
            raise ValidationError("reference count must be even for channel transit")
        try:
            g_white = spd_inv_sqrt(gt.T @ gt)
            f_white = spd_inv_sqrt(ft.T @ ft)
        except AllZeroError as exc:
            raise DegenerateReferencesError(str(exc)) from exc
        self.analysis_ = gt @ g_white  # (M, d)
        self.synthesis_ = ft @ f_white  # (M, m)
        self.n_features_in_ = gt.shape[1]
        self.n_refs_ = m_refs
        return self

    def pre_transform(self, X):
        """Analysis projection c = G x (rows of X are latents)."""
        self._check_fitted("analysis_")
        X = as_matrix(np.atleast_2d(X), "X")
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatchError(
                f"input has {X.shape[1]} features, frame expects {self.n_features_in_}"
            )
        return X @ self.analysis_.T

    def transform(self, C):
        """Synthesis y = F^T c (rows of C are received coefficients)."""
        self._check_fitted("synthesis_")
        C = as_matrix(np.atleast_2d(C), "coefficients")
        if C.shape[1] != self.n_refs_:
            raise DimensionMismatchError(
                f"got {C.shape[1]} coefficients, frame has {self.n_refs_} rows"
            )
        return C @ self.synthesis_

    def round_trip(self, X):
        """Noiseless analysis followed by synthesis."""
        return self.transform(self.pre_transform(X))
