"""Independent reference implementations used to check the library.

These deliberately avoid the code paths they verify: the linear-fit oracle
is an iterative first-order method, the conv oracle builds an explicit
design matrix, and gradients are checked against central differences.
"""

import numpy as np


def gd_linear_oracle(X, Y, noise_var, steps=10_000):
    """Minimize (1/N)||Y - F X^T||_F^2 + noise_var ||F||_F^2 by
    Nesterov-accelerated gradient descent from zero."""
    n, d = X.shape
    m = Y.shape[1]
    half_hess = X.T @ X / n + noise_var * np.eye(d)
    cross = Y.T @ X / n
    w = np.linalg.eigvalsh(half_hess)
    lip, strong = 2.0 * w[-1], 2.0 * max(w[0], 0.0)
    lr = 1.0 / lip
    beta = None
    if strong > 0:
        beta = (np.sqrt(lip) - np.sqrt(strong)) / (np.sqrt(lip) + np.sqrt(strong))
    f = np.zeros((m, d))
    f_prev = f.copy()
    for t in range(steps):
        mom = beta if beta is not None else t / (t + 3.0)
        z = f + mom * (f - f_prev)
        grad = 2.0 * (z @ half_hess - cross)
        f_prev = f
        f = z - lr * grad
    return f


def im2col_features(x, layout, kernel_size=5):
    """Explicit convolution design matrix.

    Returns (features, positions): features has shape
    (N * H * W, C * kernel_size**2 + 1) with a trailing all-ones bias
    column; row (n, p) holds the receptive field of position p in sample n.
    """
    c, h, w = layout
    n = x.shape[0]
    pad = kernel_size // 2
    img = x.reshape(n, c, h, w)
    padded = np.zeros((n, c, h + 2 * pad, w + 2 * pad))
    padded[:, :, pad : pad + h, pad : pad + w] = img
    cols = np.empty((n, h * w, c * kernel_size * kernel_size))
    idx = 0
    for ci in range(c):
        for di in range(kernel_size):
            for dj in range(kernel_size):
                cols[:, :, idx] = padded[:, ci, di : di + h, dj : dj + w].reshape(n, h * w)
                idx += 1
    feats = cols.reshape(n * h * w, -1)
    return np.hstack([feats, np.ones((feats.shape[0], 1))]), h * w


def conv_ridge_oracle(x, y, layout, c_out, noise_var=0.0, kernel_size=5):
    """Closed-form convolution-constrained linear fit.

    Solves, per output channel, the normal equations of the expected
    training objective when inputs carry additive noise of variance
    ``noise_var`` per dimension (ridge on the kernel taps, none on the
    bias). Returns a predictor function over flattened latents.
    """
    feats, positions = im2col_features(x, layout, kernel_size)
    c, h, w = layout
    n = x.shape[0]
    targets = y.reshape(n, c_out, positions)  # (N, O, P)
    gram_mat = feats.T @ feats
    ridge = np.eye(feats.shape[1]) * (noise_var * feats.shape[0])
    ridge[-1, -1] = 0.0  # bias column sees no input noise
    weights = []
    for o in range(c_out):
        rhs = feats.T @ targets[:, o, :].reshape(-1)
        weights.append(np.linalg.solve(gram_mat + ridge, rhs))
    weights = np.array(weights)  # (O, taps + 1)

    def predict(x_eval):
        f_eval, pos = im2col_features(x_eval, layout, kernel_size)
        out = f_eval @ weights.T  # (N * P, O)
        out = out.reshape(x_eval.shape[0], pos, c_out).transpose(0, 2, 1)
        return out.reshape(x_eval.shape[0], -1)

    return predict


def finite_diff_grads(loss_fn, params, step=1e-5):
    """Central-difference gradients of ``loss_fn(params)`` per parameter."""
    grads = {}
    for key, value in params.items():
        flat = np.atleast_1d(value)
        grad = np.zeros_like(flat, dtype=np.float64)
        for idx in range(flat.size):
            orig = flat.flat[idx]
            flat.flat[idx] = orig + step
            hi = loss_fn(params)
            flat.flat[idx] = orig - step
            lo = loss_fn(params)
            flat.flat[idx] = orig
            grad.flat[idx] = (hi - lo) / (2.0 * step)
        grads[key] = grad.reshape(np.shape(value)) if np.ndim(value) else grad[0]
    return grads


def two_pass_mean_square(a, b):
    """Independent MSE: explicit Python-loop two-pass summation."""
    diffs = [(float(x) - float(y)) ** 2 for x, y in zip(np.ravel(a), np.ravel(b))]
    total = 0.0
    for d in diffs:
        total += d
    return total / len(diffs)
