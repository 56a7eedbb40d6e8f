"""Physical-layer model: power normalization, real/complex pairing, AWGN,
and flat Rayleigh block fading.

Conventions
-----------
* A latent vector of even length ``d`` occupies ``k = d/2`` complex channel
  symbols. The pairing is consecutive: complex component ``j`` is
  ``(x[2j], x[2j+1])``.
* The per-vector power budget defaults to ``P_T = d/2 = k``, so a vector
  normalized with :func:`power_normalize` carries unit average power per
  complex symbol.
* ``SNR(dB) = 10 log10(symbol_power / sigma_v^2)`` where ``sigma_v^2`` is
  the noise variance per complex dimension (each real component has
  variance ``sigma_v^2 / 2``) and ``symbol_power`` is the average power of
  one complex symbol (1.0 under the default budget).
* Fading is block-constant: one coefficient ``h ~ CN(0, 1)`` per
  transmitted vector, drawn before the noise so draw order is part of the
  contract. Multiplying a real-paired vector by ``h`` acts on each
  consecutive pair as the 2x2 rotation-scaling
  ``[[Re h, -Im h], [Im h, Re h]]``.

Randomness comes from the counter-based streams of :mod:`semeq.rng`; a
transmit call never touches global generator state.
"""

from dataclasses import dataclass

import numpy as np

from .errors import OddLengthError, ValidationError, ZeroVectorError
from .validation import as_vector


@dataclass(frozen=True)
class ChannelConfig:
    """Channel parameters for one link.

    ``power_budget`` is the per-vector energy ``P_T``; ``None`` means
    "d/2 for a d-dimensional real vector", the unit-symbol-power default.
    ``snr_db = inf`` marks the noiseless channel (sigma_v^2 exactly zero).
    """

    snr_db: float
    fading: bool = False
    power_budget: float | None = None
    seed: int = 0

    def __post_init__(self):
        if np.isnan(self.snr_db) or self.snr_db == -np.inf:
            raise ValidationError("snr_db must be a real value or +inf (noiseless)")
        if self.power_budget is not None and not self.power_budget > 0:
            raise ValidationError("power_budget must be positive")


@dataclass(frozen=True)
class ChannelRealization:
    """Realized fading coefficient and noise variance for one transmission."""

    h: complex
    noise_sigma2: float


def power_normalize(x, power_budget):
    """Scale ``x`` so its squared norm equals ``power_budget`` exactly."""
    x = as_vector(x, "x")
    if x.size % 2 != 0:
        raise OddLengthError("latent length must be even for channel transit")
    norm = np.linalg.norm(x)
    if norm == 0.0:
        raise ZeroVectorError("cannot normalize a zero vector")
    return x * (np.sqrt(power_budget) / norm)


def real_to_complex(x):
    """Pair consecutive entries: (x0, x1, x2, x3) -> (x0 + i x1, x2 + i x3)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size % 2 != 0:
        raise OddLengthError("real vector must be 1-D with even length")
    return x[0::2] + 1j * x[1::2]


def complex_to_real(c):
    """Inverse of :func:`real_to_complex`; bit-exact round trip."""
    c = np.asarray(c, dtype=np.complex128)
    if c.ndim != 1:
        raise OddLengthError("complex vector must be 1-D")
    out = np.empty(2 * c.size, dtype=np.float64)
    out[0::2] = c.real
    out[1::2] = c.imag
    return out


def snr_to_sigma2(snr_db, symbol_power=1.0):
    """Noise variance per complex dimension for a target SNR."""
    if not symbol_power > 0:
        raise ValidationError("symbol_power must be positive")
    return symbol_power * 10.0 ** (-snr_db / 10.0)


def real_noise_var(snr_db, symbol_power=1.0):
    """Noise variance per real dimension (half the complex variance)."""
    return 0.5 * snr_to_sigma2(snr_db, symbol_power)


def draw_fading(rng, n=None):
    """CN(0, 1) fading coefficients: E|h|^2 = 1."""
    shape = () if n is None else (int(n),)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) * np.sqrt(0.5)


def transmit(c, cfg, rng):
    """Send a complex vector through the configured channel.

    Returns ``(received, realization)``. The fading coefficient (when
    enabled) is drawn first, then the noise vector. With fading disabled
    and zero noise the output is a bit-exact copy of the input.
    """
    c = np.asarray(c, dtype=np.complex128)
    if c.ndim != 1:
        raise OddLengthError("transmit expects a 1-D complex vector")
    sigma2 = snr_to_sigma2(cfg.snr_db)
    if cfg.fading:
        h = complex(draw_fading(rng))
        out = h * c
    else:
        h = 1.0 + 0.0j
        out = c.copy()
    if sigma2 > 0.0:
        scale = np.sqrt(sigma2 / 2.0)
        out = out + scale * (
            rng.standard_normal(c.size) + 1j * rng.standard_normal(c.size)
        )
    return out, ChannelRealization(h=h, noise_sigma2=sigma2)


def fading_rotate(x, h):
    """Apply complex scaling ``h`` to real-paired rows of ``x``.

    ``x`` may be a single even-length vector or an (n, d) matrix with a
    scalar ``h`` or one coefficient per row.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] % 2 != 0:
        raise OddLengthError("row length must be even")
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim == 0:
        h = np.broadcast_to(h, (x.shape[0],))
    elif h.shape != (x.shape[0],):
        raise ValidationError("need one fading coefficient per row")
    cx = x[:, 0::2] + 1j * x[:, 1::2]
    cx = cx * h[:, None]
    out = np.empty_like(x)
    out[:, 0::2] = cx.real
    out[:, 1::2] = cx.imag
    return out[0] if single else out
