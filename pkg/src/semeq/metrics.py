"""Distortion metrics: mean squared error and peak signal-to-noise ratio."""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .validation import check_same_length


@dataclass(frozen=True)
class PsnrConfig:
    """``peak`` is the maximum signal amplitude (1.0 for unit-range images,
    255 for 8-bit data); ``cap_db`` is reported for zero-MSE pairs so CSV
    aggregation never sees infinities."""

    peak: float = 1.0
    cap_db: float = 100.0

    def __post_init__(self):
        if not self.peak > 0:
            raise ValidationError("peak must be positive")


def mse(a, b):
    """Mean squared error between two equal-length arrays."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    check_same_length(a, b, "a", "b")
    d = a - b
    return float(np.mean(d * d))


def psnr(a, b, cfg=PsnrConfig()):
    """10 log10(peak^2 / MSE) in dB, capped at ``cfg.cap_db`` for MSE = 0."""
    err = mse(a, b)
    if err == 0.0:
        return cfg.cap_db
    value = 10.0 * np.log10(cfg.peak**2 / err)
    return float(min(value, cfg.cap_db))


def psnr_from_mse(err, cfg=PsnrConfig()):
    """PSNR for a precomputed MSE value (same capping rule)."""
    if err < 0:
        raise ValidationError("mse must be non-negative")
    if err == 0.0:
        return cfg.cap_db
    return float(min(10.0 * np.log10(cfg.peak**2 / err), cfg.cap_db))
