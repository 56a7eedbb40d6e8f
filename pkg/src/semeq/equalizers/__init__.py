from .base import ARCH_TAGS, KERNEL_SIZE, Equalizer, count_params
from .io import load_equalizer, save_equalizer
from .linear import LinearEqualizer
from .neural import NeuralEqualizer, forward, init_params, loss_and_grads
from .pfe import PfeEqualizer

__all__ = [
    "ARCH_TAGS",
    "KERNEL_SIZE",
    "Equalizer",
    "LinearEqualizer",
    "NeuralEqualizer",
    "PfeEqualizer",
    "count_params",
    "forward",
    "init_params",
    "load_equalizer",
    "loss_and_grads",
    "save_equalizer",
]
