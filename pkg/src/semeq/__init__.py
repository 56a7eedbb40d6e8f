"""semeq: semantic channel equalizers for latent-space transmission.

Simulates transmission of encoder latents over AWGN / flat-Rayleigh
channels and aligns mismatched transmitter/receiver latent spaces with
three equalizer families: a closed-form linear aligner, small trainable
neural aligners, and a zero-shot Parseval-frame equalizer.
"""

from .channel import (
    ChannelConfig,
    ChannelRealization,
    complex_to_real,
    fading_rotate,
    power_normalize,
    real_noise_var,
    real_to_complex,
    snr_to_sigma2,
    transmit,
)
from .equalizers import (
    LinearEqualizer,
    NeuralEqualizer,
    PfeEqualizer,
    count_params,
    load_equalizer,
    save_equalizer,
)
from .latents import (
    MismatchSpec,
    PilotSet,
    ToyCodecPair,
    fit_toy_codec,
    generate_mismatch,
    make_toy_images,
    mismatch_map,
)
from .metrics import PsnrConfig, mse, psnr
from .tensorio import read_pilot_set, read_tensor, write_pilot_set, write_tensor

__version__ = "0.1.0"

__all__ = [
    "ChannelConfig",
    "ChannelRealization",
    "LinearEqualizer",
    "MismatchSpec",
    "NeuralEqualizer",
    "PfeEqualizer",
    "PilotSet",
    "PsnrConfig",
    "ToyCodecPair",
    "complex_to_real",
    "count_params",
    "fading_rotate",
    "fit_toy_codec",
    "generate_mismatch",
    "load_equalizer",
    "make_toy_images",
    "mismatch_map",
    "mse",
    "power_normalize",
    "psnr",
    "read_pilot_set",
    "read_tensor",
    "real_noise_var",
    "real_to_complex",
    "save_equalizer",
    "snr_to_sigma2",
    "transmit",
    "write_pilot_set",
    "write_tensor",
]
