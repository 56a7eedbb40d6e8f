"""Latent providers: synthetic transmitter/receiver mismatch, a tiny PCA
image codec pair, procedural test images, and pilot-set assembly.

A mismatch family models two independently trained encoders: each seed
``s`` defines a private representation map, and the cross map
``T = M_rx o M_tx^{-1}`` relates the transmitter's latent to the
receiver's. Equal seeds therefore give the identity map by construction.
"""

from dataclasses import dataclass, field

import numpy as np

from . import channel
from .errors import (
    DimensionMismatchError,
    EmptyPilotSetError,
    InsufficientDataError,
    LayoutMissingError,
    ValidationError,
)
from .rng import TAG_DATA, stream
from .validation import as_matrix

FAMILIES = (
    "orthogonal",
    "general-linear",
    "permutation",
    "conv-local",
    "mildly-nonlinear",
)

_SQUARE_FAMILIES = ("orthogonal", "permutation", "conv-local")

# amplitude of the elementwise warp in the mildly-nonlinear family
WARP_ALPHA = 0.1
# spectral decay exponent of the base latent distribution
_SPECTRUM_DECAY = 1.2


@dataclass
class PilotSet:
    """Ordered paired latents, optionally with realized fading coefficients.

    ``x`` is (N, d) row-major, ``y`` is (N, m); ``fading[i]`` is the complex
    coefficient seen by pilot ``i`` when it was transmitted.
    """

    x: np.ndarray
    y: np.ndarray
    fading: np.ndarray | None = None

    def __post_init__(self):
        self.x = as_matrix(self.x, "x")
        self.y = as_matrix(self.y, "y")
        if len(self.x) != len(self.y):
            raise DimensionMismatchError("x and y must pair up row by row")
        if len(self.x) == 0:
            raise EmptyPilotSetError("pilot set is empty")
        if self.fading is not None:
            self.fading = np.asarray(self.fading, dtype=np.complex128)
            if self.fading.shape != (len(self.x),):
                raise DimensionMismatchError("fading must hold one value per pair")

    def __len__(self):
        return len(self.x)

    @property
    def d(self):
        return self.x.shape[1]

    @property
    def m(self):
        return self.y.shape[1]

    def take(self, indices):
        """Sub-select pairs (keeps order of ``indices``)."""
        idx = np.asarray(indices)
        fad = None if self.fading is None else self.fading[idx]
        return PilotSet(self.x[idx], self.y[idx], fad)

    def prefix(self, n):
        if not 1 <= n <= len(self):
            raise ValidationError(f"prefix length {n} out of range 1..{len(self)}")
        return self.take(np.arange(n))

    def permuted(self, seed):
        """Apply the seeded permutation used for incremental pilot subsets."""
        order = stream(seed, TAG_DATA).permutation(len(self))
        return self.take(order)

    def with_fading(self, fading):
        return PilotSet(self.x, self.y, fading)


@dataclass(frozen=True)
class MismatchSpec:
    """Seeded semantic mismatch between a d-dim TX and m-dim RX latent space."""

    family: str
    d: int
    m: int
    seed_tx: int = 42
    seed_rx: int = 43
    layout: tuple[int, int, int] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.d < 1 or self.m < 1:
            raise ValidationError("dimensions must be positive")
        if self.family in _SQUARE_FAMILIES and self.d != self.m:
            raise DimensionMismatchError(f"{self.family} family requires d == m")
        if self.family == "conv-local":
            if self.layout is None:
                raise LayoutMissingError("conv-local family needs a (C, H, W) layout")
            c, h, w = self.layout
            if c * h * w != self.d:
                raise DimensionMismatchError("layout does not multiply out to d")


def _random_orthogonal(n, rng):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _conv_kernel(spec):
    """Near-identity channel-mixing kernel, shared across resolutions.

    Built as delta + (perturbation of seed_rx - perturbation of seed_tx) so
    equal seeds give the exact delta kernel.
    """
    c = spec.layout[0]
    size = 3
    kernel = np.zeros((c, c, size, size))
    kernel[np.arange(c), np.arange(c), size // 2, size // 2] = 1.0
    scale = 0.35 / np.sqrt(c * size * size)

    def perturb(seed):
        return scale * stream(seed, TAG_DATA, 7).standard_normal((c, c, size, size))

    kernel += perturb(spec.seed_rx) - perturb(spec.seed_tx)
    return kernel


def _conv_apply(x, kernel, layout):
    c, h, w = layout
    n = x.shape[0]
    if x.shape[1] != c * h * w:
        raise DimensionMismatchError("latent length does not match layout")
    size = kernel.shape[-1]
    pad = size // 2
    img = x.reshape(n, c, h, w)
    padded = np.zeros((n, c, h + 2 * pad, w + 2 * pad))
    padded[:, :, pad : pad + h, pad : pad + w] = img
    out = np.zeros_like(img)
    for di in range(size):
        for dj in range(size):
            out += np.einsum(
                "nchw,oc->nohw",
                padded[:, :, di : di + h, dj : dj + w],
                kernel[:, :, di, dj],
            )
    return out.reshape(n, c * h * w)


class MismatchMap:
    """Callable cross map y = T(x) for one MismatchSpec.

    ``matrix`` is the dense linear part when the family is linear
    (None for conv-local and for the warp component of mildly-nonlinear).
    """

    def __init__(self, spec):
        self.spec = spec
        self.matrix = None
        self.kernel = None
        self.identity = spec.seed_tx == spec.seed_rx and spec.d == spec.m
        if self.identity:
            return
        if spec.family == "orthogonal":
            q_tx = _random_orthogonal(spec.d, stream(spec.seed_tx, TAG_DATA, 1))
            q_rx = _random_orthogonal(spec.d, stream(spec.seed_rx, TAG_DATA, 1))
            self.matrix = q_rx @ q_tx.T
        elif spec.family == "permutation":
            p_tx = stream(spec.seed_tx, TAG_DATA, 2).permutation(spec.d)
            p_rx = stream(spec.seed_rx, TAG_DATA, 2).permutation(spec.d)
            mat = np.zeros((spec.d, spec.d))
            # rx-permutation composed with the inverse tx-permutation
            mat[p_rx, p_tx] = 1.0
            self.matrix = mat
        elif spec.family in ("general-linear", "mildly-nonlinear"):
            a_tx = _well_conditioned(spec.d, stream(spec.seed_tx, TAG_DATA, 3))
            b_rx = stream(spec.seed_rx, TAG_DATA, 3).standard_normal((spec.m, spec.d))
            b_rx /= np.sqrt(spec.d)
            self.matrix = b_rx @ np.linalg.inv(a_tx)
        elif spec.family == "conv-local":
            self.kernel = _conv_kernel(spec)

    def __call__(self, x):
        x = as_matrix(np.atleast_2d(x), "x")
        if x.shape[1] != self.spec.d:
            raise DimensionMismatchError(
                f"latents have dimension {x.shape[1]}, map expects {self.spec.d}"
            )
        if self.identity:
            return x.copy()
        if self.spec.family == "conv-local":
            return _conv_apply(x, self.kernel, self.spec.layout)
        y = x @ self.matrix.T
        if self.spec.family == "mildly-nonlinear":
            y = y + WARP_ALPHA * np.tanh(y)
        return y


def _well_conditioned(n, rng):
    """Random invertible matrix with singular values kept in [0.5, ~2]."""
    u = _random_orthogonal(n, rng)
    v = _random_orthogonal(n, rng)
    s = 0.5 + 1.5 * rng.random(n)
    return (u * s) @ v.T


def mismatch_map(spec):
    return MismatchMap(spec)


def sample_latents(spec, count, rng):
    """Draw base TX latents for a mismatch family.

    Non-conv families use a correlated Gaussian with a power-law spectrum
    (so the latents are compressible); conv-local uses smoothed white-noise
    fields on the spatial grid.
    """
    if spec.family == "conv-local":
        c, h, w = spec.layout
        img = rng.standard_normal((count, c, h, w))
        kern = np.array([1.0, 4.0, 6.0, 4.0, 1.0])
        kern /= kern.sum()
        for axis in (2, 3):
            img = _smooth_axis(img, kern, axis)
        img *= np.sqrt(spec.d) / np.sqrt(np.mean(np.sum(img.reshape(count, -1) ** 2, axis=1)))
        return img.reshape(count, spec.d)
    lam = (np.arange(1, spec.d + 1, dtype=np.float64)) ** (-_SPECTRUM_DECAY)
    lam *= spec.d / lam.sum()
    basis = _random_orthogonal(spec.d, stream(spec.seed_tx, TAG_DATA, 4))
    z = rng.standard_normal((count, spec.d))
    return (z * np.sqrt(lam)) @ basis.T


def _smooth_axis(a, kern, axis):
    pad = len(kern) // 2
    padded = np.take(a, np.clip(np.arange(-pad, a.shape[axis] + pad), 0, a.shape[axis] - 1), axis=axis)
    out = np.zeros_like(a)
    for i, k in enumerate(kern):
        out += k * np.take(padded, np.arange(i, i + a.shape[axis]), axis=axis)
    return out


def generate_mismatch(spec, source_count, eval_count=2000, power_budget=None):
    """Seeded pilot and held-out evaluation sets for a mismatch family.

    When ``power_budget`` is given, the TX latents are normalized per
    vector to that energy before the cross map is applied, i.e. pairs are
    generated in the transmit-ready latent space. Splits are disjoint and
    reproducible from the spec seeds alone.
    """
    if source_count < 1:
        raise ValidationError("source_count must be >= 1")
    if eval_count < 0:
        raise ValidationError("eval_count must be >= 0")
    rng = stream(spec.seed_tx, TAG_DATA, 5, spec.seed_rx)
    total = source_count + eval_count
    x = sample_latents(spec, total, rng)
    if power_budget is not None:
        x = np.vstack([channel.power_normalize(row, power_budget) for row in x])
    y = mismatch_map(spec)(x)
    train = PilotSet(x[:source_count], y[:source_count])
    if eval_count == 0:
        return train, None
    hold = PilotSet(x[source_count:], y[source_count:])
    return train, hold


# ---------------------------------------------------------------------------
# toy image codec


def make_toy_images(count, size, seed):
    """Procedural grayscale images: seeded mixtures of 2-D Gabor patches.

    Returns (count, size*size) rows with values in [0, 1].
    """
    if size < 4:
        raise ValidationError("size must be at least 4")
    rng = stream(seed, TAG_DATA, 6)
    rr, cc = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    out = np.empty((count, size * size))
    for i in range(count):
        n_patches = int(rng.integers(2, 6))
        img = np.zeros((size, size))
        for _ in range(n_patches):
            r0, c0 = rng.random(2) * (size - 1)
            sigma = size * (0.2 + 0.3 * rng.random())
            freq = (0.4 + 0.8 * rng.random()) / sigma
            theta = rng.random() * np.pi
            phase = rng.random() * 2 * np.pi
            amp = (0.3 + 0.7 * rng.random()) * rng.choice([-1.0, 1.0])
            dr = rr - r0
            dc = cc - c0
            envelope = np.exp(-(dr**2 + dc**2) / (2 * sigma**2))
            carrier = np.cos(2 * np.pi * freq * (dr * np.cos(theta) + dc * np.sin(theta)) + phase)
            img += amp * envelope * carrier
        peak = np.max(np.abs(img))
        if peak > 0:
            img = 0.5 + 0.45 * img / peak
        else:
            img += 0.5
        out[i] = img.ravel()
    return out


@dataclass
class ToyCodecPair:
    """Affine encoder/decoder built from principal directions.

    encode(u) = (u - mean) @ basis, decode(x) = x @ basis.T + mean, with
    ``basis`` (n, d) having orthonormal columns. ``rho`` is the bandwidth
    ratio (d/2 complex symbols per n source dimensions).
    """

    mean: np.ndarray
    basis: np.ndarray
    image_size: int | None = field(default=None)

    @property
    def source_dim(self):
        return self.basis.shape[0]

    @property
    def latent_dim(self):
        return self.basis.shape[1]

    @property
    def rho(self):
        return (self.latent_dim / 2) / self.source_dim

    def encode(self, images):
        u = as_matrix(np.atleast_2d(images), "images")
        if u.shape[1] != self.source_dim:
            raise DimensionMismatchError("image length does not match codec")
        return (u - self.mean) @ self.basis

    def decode(self, latents):
        x = as_matrix(np.atleast_2d(latents), "latents")
        if x.shape[1] != self.latent_dim:
            raise DimensionMismatchError("latent length does not match codec")
        return x @ self.basis.T + self.mean


def fit_toy_codec(images, d, seed, jitter=0.05):
    """Linear codec: principal directions of a seed-jittered view of the
    training images, expressed in a seeded latent parameterization.

    A linear autoencoder's reconstruction loss is invariant to orthogonal
    reparameterizations of its latent space, so independently trained
    codecs land on the same principal subspace but in arbitrary
    coordinates. The seed controls both the data jitter and the latent
    rotation; two codecs with equal seeds are identical, while different
    seeds disagree by a (near-)orthogonal latent transform, which is the
    semantic mismatch the aligners have to undo. Reconstruction quality is
    unaffected by the rotation.
    """
    u = as_matrix(images, "images")
    count, n = u.shape
    if d > n:
        raise ValidationError(f"latent size {d} exceeds source dimension {n}")
    if count < d:
        raise InsufficientDataError(f"need at least {d} images, got {count}")
    rng = stream(seed, TAG_DATA, 8)
    jittered = u + jitter * rng.standard_normal(u.shape)
    mean = jittered.mean(axis=0)
    centered = jittered - mean
    _, _, vt = np.linalg.svd(centered, full_matrices=True)
    basis = vt[:d].T
    # fix the SVD sign ambiguity so codecs are reproducible
    signs = np.sign(basis[np.argmax(np.abs(basis), axis=0), np.arange(d)])
    signs[signs == 0] = 1.0
    basis = (basis * signs) @ _random_orthogonal(d, rng)
    size = int(round(np.sqrt(n)))
    return ToyCodecPair(mean=mean, basis=basis, image_size=size if size * size == n else None)
