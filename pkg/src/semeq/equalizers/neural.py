"""Small trainable post-aligners with hand-written gradients.

Three architectures:

* ``mlp``  - one hidden layer (width equal to the input width), biases on
  both layers, and a PReLU with a single learnable slope shared across
  units (initialized at 0.25).
* ``cnn1`` - a single 5x5 convolution with bias and no activation; a
  purely linear map with weight sharing.
* ``cnn2`` - two 5x5 convolutions with biases separated by a shared-slope
  PReLU.

Convolutions use stride 1 and zero padding 2, so spatial shape is
preserved and a fitted kernel applies unchanged at any resolution with the
same channel count. Inputs to the convolutional aligners carry a
(channels, height, width) layout.

Training minimizes the mean squared element error with Adam
(beta1 = 0.9, beta2 = 0.999, eps = 1e-8). Channel corruption (noise at
the alignment SNR, plus fading when enabled) is re-drawn on the input
latents at every forward pass; the validation inputs use one fixed
corruption draw so model selection is deterministic. Early stopping keeps
the best-selection-loss checkpoint.
"""

import numpy as np
from sklearn.base import TransformerMixin

from ..channel import draw_fading, fading_rotate, real_noise_var
from ..errors import (
    DimensionMismatchError,
    EmptyPilotSetError,
    LayoutMissingError,
    ValidationError,
)
from ..rng import TAG_FIT, stream
from ..validation import as_matrix
from .base import KERNEL_SIZE, Equalizer

PAD = KERNEL_SIZE // 2

ARCHS = ("mlp", "cnn1", "cnn2")

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
PRELU_INIT = 0.25


# ---------------------------------------------------------------------------
# primitive layers


def _prelu(z, slope):
    return np.where(z > 0, z, slope * z)


def _conv_forward(x, kernel, bias):
    """x (B, C, H, W), kernel (O, C, 5, 5), bias (O,) -> (B, O, H, W)."""
    b, c, h, w = x.shape
    if h == 1 and w == 1:
        # off-center taps only ever see zero padding
        out = x[:, :, 0, 0] @ kernel[:, :, PAD, PAD].T + bias
        return out[:, :, None, None], x
    padded = np.zeros((b, c, h + 2 * PAD, w + 2 * PAD))
    padded[:, :, PAD : PAD + h, PAD : PAD + w] = x
    out = np.broadcast_to(bias[None, :, None, None], (b, kernel.shape[0], h, w)).copy()
    for di in range(KERNEL_SIZE):
        for dj in range(KERNEL_SIZE):
            out += np.einsum(
                "bchw,oc->bohw", padded[:, :, di : di + h, dj : dj + w], kernel[:, :, di, dj]
            )
    return out, padded


def _conv_backward(padded, kernel, dout):
    """Gradients of the conv wrt input, kernel and bias."""
    b, o, h, w = dout.shape
    dbias = dout.sum(axis=(0, 2, 3))
    if h == 1 and w == 1 and padded.shape[2] == 1:
        # fast path pairs with _conv_forward's 1x1 case (cache holds x itself);
        # off-center kernel taps never touch data, so their gradient is zero
        dflat = dout[:, :, 0, 0]
        xflat = padded[:, :, 0, 0]
        dkernel = np.zeros_like(kernel)
        dkernel[:, :, PAD, PAD] = dflat.T @ xflat
        dx = (dflat @ kernel[:, :, PAD, PAD])[:, :, None, None]
        return dx, dkernel, dbias
    dkernel = np.empty_like(kernel)
    dpadded = np.zeros_like(padded)
    for di in range(KERNEL_SIZE):
        for dj in range(KERNEL_SIZE):
            window = padded[:, :, di : di + h, dj : dj + w]
            dkernel[:, :, di, dj] = np.einsum("bohw,bchw->oc", dout, window)
            dpadded[:, :, di : di + h, dj : dj + w] += np.einsum(
                "bohw,oc->bchw", dout, kernel[:, :, di, dj]
            )
    dx = dpadded[:, :, PAD : PAD + h, PAD : PAD + w]
    return dx, dkernel, dbias



# ---------------------------------------------------------------------------
# architectures


def init_params(arch, rng, d=None, m=None, c_in=None, c_out=None):
    """Seeded parameter initialization (He-style weights, zero biases)."""
    if arch == "mlp":
        h = d
        return {
            "w1": rng.standard_normal((h, d)) * np.sqrt(2.0 / d),
            "b1": np.zeros(h),
            "w2": rng.standard_normal((m, h)) * np.sqrt(2.0 / h),
            "b2": np.zeros(m),
            "slope": np.array(PRELU_INIT),
        }
    fan = c_in * KERNEL_SIZE**2
    if arch == "cnn1":
        return {
            "k1": rng.standard_normal((c_out, c_in, KERNEL_SIZE, KERNEL_SIZE)) * np.sqrt(2.0 / fan),
            "b1": np.zeros(c_out),
        }
    if arch == "cnn2":
        if c_out != c_in:
            raise ValidationError("cnn2 keeps the channel count fixed")
        return {
            "k1": rng.standard_normal((c_in, c_in, KERNEL_SIZE, KERNEL_SIZE)) * np.sqrt(2.0 / fan),
            "b1": np.zeros(c_in),
            "k2": rng.standard_normal((c_in, c_in, KERNEL_SIZE, KERNEL_SIZE)) * np.sqrt(2.0 / fan),
            "b2": np.zeros(c_in),
            "slope": np.array(PRELU_INIT),
        }
    raise ValidationError(f"unknown architecture {arch!r}")


def forward(arch, params, x):
    """Network output plus the cache needed for the backward pass.

    ``x`` is (B, d) for the MLP and (B, C, H, W) for the CNNs.
    """
    if arch == "mlp":
        z1 = x @ params["w1"].T + params["b1"]
        a1 = _prelu(z1, params["slope"])
        out = a1 @ params["w2"].T + params["b2"]
        return out, (x, z1, a1)
    if arch == "cnn1":
        out, padded = _conv_forward(x, params["k1"], params["b1"])
        return out, (padded,)
    if arch == "cnn2":
        h1, padded1 = _conv_forward(x, params["k1"], params["b1"])
        a1 = _prelu(h1, params["slope"])
        out, padded2 = _conv_forward(a1, params["k2"], params["b2"])
        return out, (padded1, h1, padded2)
    raise ValidationError(f"unknown architecture {arch!r}")


def loss_and_grads(arch, params, x, y, scale=1.0):
    """Squared-error loss ``scale * 0.5 * sum((out - y)^2)`` and its
    analytic gradients with respect to every parameter."""
    out, cache = forward(arch, params, x)
    diff = out - y
    loss = 0.5 * scale * float(np.sum(diff * diff))
    dout = scale * diff
    grads = {}
    if arch == "mlp":
        xb, z1, a1 = cache
        grads["w2"] = dout.T @ a1
        grads["b2"] = dout.sum(axis=0)
        da1 = dout @ params["w2"]
        pos = z1 > 0
        grads["slope"] = np.array(np.sum(da1 * np.where(pos, 0.0, z1)))
        dz1 = da1 * np.where(pos, 1.0, params["slope"])
        grads["w1"] = dz1.T @ xb
        grads["b1"] = dz1.sum(axis=0)
    elif arch == "cnn1":
        (padded,) = cache
        _, grads["k1"], grads["b1"] = _conv_backward(padded, params["k1"], dout)
    elif arch == "cnn2":
        padded1, h1, padded2 = cache
        da1, grads["k2"], grads["b2"] = _conv_backward(padded2, params["k2"], dout)
        pos = h1 > 0
        grads["slope"] = np.array(np.sum(da1 * np.where(pos, 0.0, h1)))
        dh1 = da1 * np.where(pos, 1.0, params["slope"])
        _, grads["k1"], grads["b1"] = _conv_backward(padded1, params["k1"], dh1)
    else:
        raise ValidationError(f"unknown architecture {arch!r}")
    return loss, grads


# ---------------------------------------------------------------------------
# estimator


class NeuralEqualizer(TransformerMixin, Equalizer):
    """Trainable post-aligner (``mlp``, ``cnn1`` or ``cnn2``).

    Parameters
    ----------
    arch : str
        Architecture name.
    layout : (C, H, W) or None
        Input layout; required for the convolutional architectures.
    snr_align_db : float or None
        Channel SNR used to corrupt training inputs; None trains noiselessly.
    fading : bool
        Re-draw a fading coefficient per sample at every forward pass.
    learning_rate, weight_decay : float or None
        None picks the architecture defaults (1e-4 / no decay for the MLP,
        1e-3 / 0.001 for the CNNs).
    batch_size, max_epochs, patience, val_fraction, min_val_pilots, seed :
        Training-loop knobs. With fewer than ``min_val_pilots`` pilots no
        validation split is made and selection uses the train loss.
    """

    def __init__(
        self,
        arch="mlp",
        layout=None,
        snr_align_db=None,
        fading=False,
        learning_rate=None,
        weight_decay=None,
        batch_size=64,
        max_epochs=2000,
        patience=20,
        val_fraction=0.1,
        min_val_pilots=10,
        seed=0,
    ):
        self.arch = arch
        self.layout = layout
        self.snr_align_db = snr_align_db
        self.fading = fading
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.val_fraction = val_fraction
        self.min_val_pilots = min_val_pilots
        self.seed = seed

    # -- helpers ----------------------------------------------------------

    def _is_conv(self):
        return self.arch in ("cnn1", "cnn2")

    def _resolve_dims(self, d, m):
        if self.arch == "mlp":
            return {"d": d, "m": m}
        if self.layout is None:
            raise LayoutMissingError(f"{self.arch} needs a (C, H, W) layout")
        c, h, w = self.layout
        if c * h * w != d:
            raise DimensionMismatchError("layout does not multiply out to the input width")
        if m % (h * w) != 0:
            raise DimensionMismatchError("output width is not a whole number of channels")
        c_out = m // (h * w)
        if self.arch == "cnn2" and c_out != c:
            raise DimensionMismatchError("cnn2 requires matching input/output channels")
        return {"c_in": c, "c_out": c_out}

    def _shape_batch(self, x2d):
        if self.arch == "mlp":
            return x2d
        c, h, w = self.layout
        return x2d.reshape(len(x2d), c, h, w)

    def _corrupt(self, x2d, rng, sigma2_real):
        if self.fading:
            x2d = fading_rotate(x2d, draw_fading(rng, len(x2d)))
        if sigma2_real > 0:
            x2d = x2d + rng.standard_normal(x2d.shape) * np.sqrt(sigma2_real)
        return x2d

    # -- fitting ----------------------------------------------------------

    def fit(self, X, y):
        if self.arch not in ARCHS:
            raise ValidationError(f"unknown architecture {self.arch!r}")
        X = as_matrix(X, "X")
        y = as_matrix(y, "y")
        if len(X) == 0:
            raise EmptyPilotSetError("no pilots")
        if len(X) != len(y):
            raise DimensionMismatchError("X and y must have the same number of rows")
        n, d = X.shape
        m = y.shape[1]
        dims = self._resolve_dims(d, m)

        lr = self.learning_rate
        if lr is None:
            lr = 1e-4 if self.arch == "mlp" else 1e-3
        wd = self.weight_decay
        if wd is None:
            wd = 0.0 if self.arch == "mlp" else 1e-3
        sigma2_real = (
            real_noise_var(self.snr_align_db) if self.snr_align_db is not None else 0.0
        )

        init_rng = stream(self.seed, TAG_FIT, 0)
        data_rng = stream(self.seed, TAG_FIT, 1)
        noise_rng = stream(self.seed, TAG_FIT, 2)
        val_rng = stream(self.seed, TAG_FIT, 3)

        params = init_params(self.arch, init_rng, **dims)

        if n >= self.min_val_pilots:
            n_val = max(1, int(round(self.val_fraction * n)))
            x_train, y_train = X[: n - n_val], y[: n - n_val]
            x_val2d = self._corrupt(X[n - n_val :], val_rng, sigma2_real)
            y_val = y[n - n_val :]
        else:
            n_val = 0
            x_train, y_train = X, y
            x_val2d, y_val = None, None

        adam_m = {k: np.zeros_like(v) for k, v in params.items()}
        adam_v = {k: np.zeros_like(v) for k, v in params.items()}
        step = 0
        best = {k: v.copy() for k, v in params.items()}
        best_loss = np.inf
        evals_since_best = 0
        history = {"train_loss": [], "selection_loss": [], "best_loss": []}

        n_train = len(x_train)
        batch = min(self.batch_size, n_train)
        for _epoch in range(self.max_epochs):
            order = data_rng.permutation(n_train)
            epoch_losses = []
            for start in range(0, n_train, batch):
                idx = order[start : start + batch]
                xb2d = self._corrupt(x_train[idx], noise_rng, sigma2_real)
                xb = self._shape_batch(xb2d)
                yb = y_train[idx]
                target = yb if self.arch == "mlp" else self._shape_output(yb)
                scale = 2.0 / yb.size  # loss becomes the mean squared element error
                loss, grads = loss_and_grads(self.arch, params, xb, target, scale)
                epoch_losses.append(loss)
                step += 1
                for k in params:
                    g = grads[k] + wd * params[k]
                    adam_m[k] = ADAM_BETA1 * adam_m[k] + (1 - ADAM_BETA1) * g
                    adam_v[k] = ADAM_BETA2 * adam_v[k] + (1 - ADAM_BETA2) * g * g
                    m_hat = adam_m[k] / (1 - ADAM_BETA1**step)
                    v_hat = adam_v[k] / (1 - ADAM_BETA2**step)
                    params[k] = params[k] - lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)

            train_loss = float(np.mean(epoch_losses))
            if n_val > 0:
                out, _ = forward(self.arch, params, self._shape_batch(x_val2d))
                diff = out.reshape(n_val, -1) - y_val
                sel_loss = float(np.mean(diff * diff))
            else:
                sel_loss = train_loss
            history["train_loss"].append(train_loss)
            history["selection_loss"].append(sel_loss)
            if sel_loss < best_loss:
                best_loss = sel_loss
                best = {k: v.copy() for k, v in params.items()}
                evals_since_best = 0
            else:
                evals_since_best += 1
            history["best_loss"].append(best_loss)
            if evals_since_best >= self.patience:
                break

        self.params_ = best
        self.history_ = history
        self.best_loss_ = best_loss
        self.n_epochs_ = len(history["train_loss"])
        self.n_features_in_ = d
        self.n_outputs_ = m
        self.layout_ = tuple(self.layout) if self.layout is not None else None
        return self

    def _shape_output(self, y2d):
        c, h, w = self.layout
        c_out = y2d.shape[1] // (h * w)
        return y2d.reshape(len(y2d), c_out, h, w)

    # -- application ------------------------------------------------------

    def transform(self, X):
        """Apply the fitted aligner.

        The MLP accepts only inputs of the fitted width. The convolutional
        aligners additionally accept 4-D (n, C, H, W) batches at any
        spatial resolution with the fitted channel count.
        """
        self._check_fitted("params_")
        X = np.asarray(X, dtype=np.float64)
        if self._is_conv() and X.ndim == 4:
            if X.shape[1] != self.layout_[0]:
                raise DimensionMismatchError(
                    f"input has {X.shape[1]} channels, aligner expects {self.layout_[0]}"
                )
            out, _ = forward(self.arch, self.params_, X)
            return out.reshape(len(X), -1)
        if X.ndim > 2:
            X = X.reshape(X.shape[0], -1)
        X = as_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatchError(
                f"input has {X.shape[1]} features, aligner expects {self.n_features_in_}"
            )
        out, _ = forward(self.arch, self.params_, self._shape_batch(X))
        return out.reshape(len(X), -1)
