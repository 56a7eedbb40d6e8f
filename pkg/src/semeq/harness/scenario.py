"""Scenario assembly and single-point fit/evaluate machinery.

A scenario provides transmit-ready pools: TX latents are normalized per
vector to the power budget (so the receiver-side pairs are defined in the
transmitted latent space), plus a held-out evaluation set and, for the
image codec scenario, the source images and the receiver decoder for
end-to-end PSNR.

The identity baseline and the frame equalizer map the transmit space to
the receiver space isometrically, so their outputs are rescaled by the
ratio of the marginal latent scales (a system constant both ends know);
fitted aligners absorb scale on their own.
"""

import time
from dataclasses import dataclass

import numpy as np

from .. import channel
from ..errors import ConfigError
from ..latents import (
    MismatchSpec,
    PilotSet,
    fit_toy_codec,
    generate_mismatch,
    make_toy_images,
)
from ..equalizers import LinearEqualizer, NeuralEqualizer, PfeEqualizer
from ..metrics import PsnrConfig, psnr_from_mse
from ..rng import TAG_EVAL_CHANNEL, TAG_PILOT_FADING, derive_seed, stream

_EQ_INDEX = {"none": 0, "linear": 1, "mlp": 2, "cnn1": 3, "cnn2": 4, "pfe": 5, "pfe-full": 6}


@dataclass
class Scenario:
    kind: str
    d: int
    m: int
    layout: tuple[int, int, int] | None
    power_budget: float
    x_pool: np.ndarray
    y_pool: np.ndarray
    x_eval: np.ndarray
    y_eval: np.ndarray
    pilot_fading: np.ndarray
    output_scale: float
    eval_images: np.ndarray | None = None
    codec_rx: object | None = None

    @property
    def pool(self):
        return PilotSet(self.x_pool, self.y_pool, self.pilot_fading)

    def permuted_pool(self, run_seed):
        return self.pool.permuted(run_seed)


def build_scenario(cfg):
    """Materialize the pools described by an ExperimentConfig."""
    if cfg.scenario == "mismatch":
        return _build_mismatch(cfg)
    return _build_toy_codec(cfg)


def _pilot_fading(cfg, count):
    rng = stream(cfg.seed_tx, TAG_PILOT_FADING, cfg.seed_rx)
    return channel.draw_fading(rng, count)


def _build_mismatch(cfg):
    m = cfg.m if cfg.m is not None else cfg.d
    if cfg.d % 2 != 0:
        raise ConfigError("d must be even for channel transit")
    power = cfg.power_budget if cfg.power_budget is not None else cfg.d / 2.0
    spec = MismatchSpec(cfg.family, cfg.d, m, cfg.seed_tx, cfg.seed_rx, layout=cfg.layout)
    train, hold = generate_mismatch(
        spec, cfg.pool_size, cfg.eval_size, power_budget=power
    )
    return _finish(cfg, "mismatch", cfg.d, m, cfg.layout, power, train, hold)


def _build_toy_codec(cfg):
    n = cfg.image_size**2
    d = cfg.latent_dim
    if d is None:
        d = n // 6
        d -= d % 2
    if d % 2 != 0:
        raise ConfigError("latent_dim must be even for channel transit")
    power = cfg.power_budget if cfg.power_budget is not None else d / 2.0
    total = cfg.pool_size + cfg.eval_size
    images = make_toy_images(total, cfg.image_size, cfg.dataset_seed)
    codec_tx = fit_toy_codec(images[: cfg.pool_size], d, cfg.seed_tx)
    codec_rx = fit_toy_codec(images[: cfg.pool_size], d, cfg.seed_rx)
    x_raw = codec_tx.encode(images)
    x = np.vstack([channel.power_normalize(row, power) for row in x_raw])
    y = codec_rx.encode(images)
    train = PilotSet(x[: cfg.pool_size], y[: cfg.pool_size])
    hold = PilotSet(x[cfg.pool_size :], y[cfg.pool_size :])
    layout = cfg.layout if cfg.layout is not None else (d, 1, 1)
    scen = _finish(cfg, "toy-codec", d, d, layout, power, train, hold)
    scen.eval_images = images[cfg.pool_size :]
    scen.codec_rx = codec_rx
    return scen


def _finish(cfg, kind, d, m, layout, power, train, hold):
    if "none" in cfg.equalizers and d != m:
        raise ConfigError("the unaligned baseline requires d == m")
    if any(k in cfg.equalizers for k in ("cnn1", "cnn2")) and layout is None:
        raise ConfigError("convolutional equalizers need layout_c/h/w")
    scale = 1.0
    if d == m:
        scale = float(
            np.mean(np.linalg.norm(train.y, axis=1))
            / np.mean(np.linalg.norm(train.x, axis=1))
        )
    return Scenario(
        kind=kind,
        d=d,
        m=m,
        layout=layout,
        power_budget=power,
        x_pool=train.x,
        y_pool=train.y,
        x_eval=hold.x,
        y_eval=hold.y,
        pilot_fading=_pilot_fading(cfg, len(train)),
        output_scale=scale,
    )


# ---------------------------------------------------------------------------
# per-point fit and evaluation


class IdentityAligner:
    """Unaligned baseline: pass the received latent through (rescaled)."""

    def __init__(self, scale=1.0):
        self.scale = scale

    def pre_transform(self, X):
        return X

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim > 2:
            X = X.reshape(X.shape[0], -1)
        return self.scale * X


def frame_size_for(kind, n_pilots, d):
    """Reference-set size used by the frame equalizer at a grid point.

    The compressive variant uses as many frame rows as there are pilots
    (rounded down to an even count); the full variant always uses d rows,
    matching the transmitted latent dimension.
    """
    if kind == "pfe-full":
        return d
    return max(2, 2 * (n_pilots // 2))


def fit_equalizer(kind, cfg, scenario, permuted_pool, n_pilots, snr_align_db, fading, fit_seed):
    """Fit one equalizer on the first ``n_pilots`` pairs of the permuted pool.

    Returns (aligner, rescale_output, fit_seconds).
    """
    pilots = permuted_pool.prefix(n_pilots)
    start = time.perf_counter()
    if kind == "none":
        eq, rescale = IdentityAligner(), True
    elif kind == "linear":
        eq = LinearEqualizer(noise_var=channel.real_noise_var(snr_align_db))
        eq.fit(pilots.x, pilots.y, fading=pilots.fading if fading else None)
        rescale = False
    elif kind in ("mlp", "cnn1", "cnn2"):
        eq = NeuralEqualizer(
            arch=kind,
            layout=scenario.layout if kind != "mlp" else None,
            snr_align_db=snr_align_db,
            fading=fading,
            batch_size=cfg.batch_size,
            max_epochs=cfg.max_epochs,
            patience=cfg.patience,
            seed=fit_seed,
        )
        eq.fit(pilots.x, pilots.y)
        rescale = False
    elif kind in ("pfe", "pfe-full"):
        m_refs = frame_size_for(kind, n_pilots, scenario.d)
        refs = permuted_pool.prefix(min(m_refs, len(permuted_pool)))
        eq = PfeEqualizer().fit(refs.x, refs.y)
        rescale = True
    else:
        raise ConfigError(f"unknown equalizer {kind!r}")
    return eq, rescale, time.perf_counter() - start


@dataclass
class EvalTable:
    """Per-vector channel draws for one run seed.

    ``h[i, r]`` and ``noise[i, r, :]`` come from the stream
    (run_seed, TAG_EVAL_CHANNEL, i); the same table serves every equalizer
    and grid point of the run, which pairs the comparisons and keeps the
    frame equalizer's rows identical across alignment SNRs.
    """

    h: np.ndarray  # (E, R) complex
    noise: np.ndarray  # (E, R, max_half) complex, unit variance per symbol


def build_eval_table(run_seed, n_eval, repeats, max_half):
    h = np.empty((n_eval, repeats), dtype=np.complex128)
    noise = np.empty((n_eval, repeats, max_half), dtype=np.complex128)
    for i in range(n_eval):
        g = stream(run_seed, TAG_EVAL_CHANNEL, i)
        h[i] = channel.draw_fading(g, repeats)
        re = g.standard_normal((repeats, max_half))
        im = g.standard_normal((repeats, max_half))
        noise[i] = (re + 1j * im) * np.sqrt(0.5)
    return EvalTable(h=h, noise=noise)


def max_half_width(cfg, d):
    """Widest complex noise slice any configured equalizer can need."""
    width = d
    if "pfe" in cfg.equalizers:
        width = max(width, frame_size_for("pfe", max(cfg.pilots), d))
    return width // 2


def evaluate(eq, rescale, scenario, snr_eval_db, fading, table):
    """Mean PSNR / MSE of one fitted aligner over the evaluation set."""
    coeffs = eq.pre_transform(scenario.x_eval)
    width = coeffs.shape[1]
    if width % 2 != 0:
        raise ConfigError("transmitted width must be even")
    half = width // 2
    ce = coeffs[:, 0::2] + 1j * coeffs[:, 1::2]
    sigma2 = channel.snr_to_sigma2(snr_eval_db)
    repeats = table.h.shape[1]
    cfg_psnr = PsnrConfig(peak=1.0)
    total_mse = 0.0
    total_psnr = 0.0
    for r in range(repeats):
        received = ce * table.h[:, r][:, None] if fading else ce
        if sigma2 > 0.0:
            received = received + np.sqrt(sigma2) * table.noise[:, r, :half]
        flat = np.empty((len(ce), width))
        flat[:, 0::2] = received.real
        flat[:, 1::2] = received.imag
        y_hat = eq.transform(flat)
        if rescale:
            y_hat = y_hat * scenario.output_scale
        if scenario.kind == "toy-codec":
            rec = scenario.codec_rx.decode(y_hat)
            per_item = np.mean((rec - scenario.eval_images) ** 2, axis=1)
        else:
            per_item = np.mean((y_hat - scenario.y_eval) ** 2, axis=1)
        total_mse += float(np.sum(per_item))
        total_psnr += float(np.sum([psnr_from_mse(e, cfg_psnr) for e in per_item]))
    count = len(ce) * repeats
    return total_psnr / count, total_mse / count


def fit_seed_for(run_seed, kind, point_index):
    """Deterministic training seed for one grid point."""
    return derive_seed(run_seed, _EQ_INDEX[kind], point_index)
