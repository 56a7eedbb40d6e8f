"""Common equalizer surface and architecture parameter accounting.

Every equalizer is a scikit-learn style estimator: hyperparameters in
``__init__`` (so ``get_params``/``set_params`` work), state learned in
``fit``, application through ``transform``. The transmitter-side
pre-transform is the identity for all aligners except the frame equalizer,
which projects onto its reference directions before transmission.
"""

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ..errors import ValidationError

KERNEL_SIZE = 5

ARCH_TAGS = {"linear": 0, "mlp": 1, "cnn1": 2, "cnn2": 3, "pfe": 4}


class Equalizer(BaseEstimator):
    """Base class: identity pre-transform, fitted-state bookkeeping."""

    def pre_transform(self, X):
        """Transmitter-side transform applied before the channel."""
        return X

    def _check_fitted(self, attr):
        if not hasattr(self, attr):
            raise NotFittedError(
                f"{type(self).__name__} is not fitted; call fit() first"
            )


def count_params(arch, dims):
    """Number of trainable parameters for an aligner architecture.

    dims:
      linear, mlp  -> (d, m); the MLP hidden width equals d and it uses
                      biases on both layers plus one shared PReLU slope
      cnn1         -> (c_in, c_out); one 5x5 conv layer with bias
      cnn2         -> (c,); two 5x5 conv layers with biases and one shared
                      PReLU slope between them
    """
    if arch == "linear":
        d, m = dims
        return d * m
    if arch == "mlp":
        d, m = dims
        h = d
        return d * h + h + h * m + m + 1
    if arch == "cnn1":
        c_in, c_out = dims
        return c_in * c_out * KERNEL_SIZE**2 + c_out
    if arch == "cnn2":
        (c,) = dims
        return 2 * (c * c * KERNEL_SIZE**2 + c) + 1
    raise ValidationError(f"unknown architecture {arch!r}")
