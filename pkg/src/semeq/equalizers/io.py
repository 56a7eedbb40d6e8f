"""Equalizer container files.

Reuses the SEQL framing (see :mod:`semeq.tensorio`) with format code 0x82.
Body layout::

    0x10 manifest: u8 arch tag (0 linear, 1 mlp, 2 cnn1, 3 cnn2, 4 pfe) |
                   u8 ndims | ndims x u32 dims |
                   u32 byte length | UTF-8 "key=value" lines (hyperparameters)
    0x20 named tensor (repeated): u8 name length | name bytes | tensor body

Dims by architecture: linear/mlp (d, m); cnn1/cnn2 (c_in, h, w, c_out);
pfe (d, m, M). Parameters are stored as binary32, so a reloaded equalizer
matches the original to single precision.
"""

import io
import struct

import numpy as np

from ..errors import TensorFormatError, UnsupportedVersionError, ValidationError
from ..tensorio import (
    FORMAT_EQUALIZER,
    _read_exact,
    _read_header,
    _read_tensor_body,
    _to_f32,
    _write_header,
    _write_tensor_body,
)
from .base import ARCH_TAGS
from .linear import LinearEqualizer
from .neural import NeuralEqualizer
from .pfe import PfeEqualizer

SECTION_MANIFEST = 0x10
SECTION_NAMED_TENSOR = 0x20

_TAG_TO_ARCH = {v: k for k, v in ARCH_TAGS.items()}


def _kv_encode(pairs):
    return "".join(f"{k}={v}\n" for k, v in pairs.items()).encode("utf-8")


def _kv_decode(blob):
    out = {}
    for line in blob.decode("utf-8").splitlines():
        if not line:
            continue
        key, _, value = line.partition("=")
        out[key] = value
    return out


def _describe(eq):
    """(arch name, dims tuple, hyper dict, named tensors) for a fitted equalizer."""
    if isinstance(eq, LinearEqualizer):
        m, d = eq.matrix_.shape
        hyper = {
            "noise_var": repr(eq.noise_var),
            "jitter": repr(eq.jitter),
            "rank_deficient": str(int(eq.rank_deficient_)),
        }
        return "linear", (d, m), hyper, {"matrix": eq.matrix_}
    if isinstance(eq, NeuralEqualizer):
        hyper = {
            "snr_align_db": "none" if eq.snr_align_db is None else repr(eq.snr_align_db),
            "fading": str(int(eq.fading)),
            "seed": str(eq.seed),
        }
        tensors = {k: v for k, v in eq.params_.items()}
        if eq.arch == "mlp":
            return "mlp", (eq.n_features_in_, eq.n_outputs_), hyper, tensors
        c, h, w = eq.layout_
        c_out = eq.n_outputs_ // (h * w)
        return eq.arch, (c, h, w, c_out), hyper, tensors
    if isinstance(eq, PfeEqualizer):
        dims = (eq.analysis_.shape[1], eq.synthesis_.shape[1], eq.n_refs_)
        return "pfe", dims, {}, {"analysis": eq.analysis_, "synthesis": eq.synthesis_}
    raise ValidationError(f"cannot serialize {type(eq).__name__}")


def save_equalizer(path, eq):
    """Write a fitted equalizer to a SEQL container."""
    arch, dims, hyper, tensors = _describe(eq)
    buf = io.BytesIO()
    _write_header(buf, FORMAT_EQUALIZER)
    kv = _kv_encode(hyper)
    buf.write(struct.pack("<BBB", SECTION_MANIFEST, ARCH_TAGS[arch], len(dims)))
    for dim in dims:
        buf.write(struct.pack("<I", dim))
    buf.write(struct.pack("<I", len(kv)))
    buf.write(kv)
    for name, tensor in tensors.items():
        encoded = name.encode("utf-8")
        buf.write(struct.pack("<BB", SECTION_NAMED_TENSOR, len(encoded)))
        buf.write(encoded)
        _write_tensor_body(buf, _to_f32(tensor, name))
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def load_equalizer(path):
    """Read an equalizer container and rebuild a fitted estimator."""
    with open(path, "rb") as fh:
        data = fh.read()
    buf = io.BytesIO(data)
    code = _read_header(buf)
    if code != FORMAT_EQUALIZER:
        raise UnsupportedVersionError(f"file is not an equalizer container (code {code})")
    arch = None
    dims = None
    hyper = {}
    tensors = {}
    while True:
        tag_byte = buf.read(1)
        if not tag_byte:
            break
        tag = tag_byte[0]
        if tag == SECTION_MANIFEST:
            arch_tag, ndims = struct.unpack("<BB", _read_exact(buf, 2, "manifest"))
            if arch_tag not in _TAG_TO_ARCH:
                raise TensorFormatError(f"unknown architecture tag {arch_tag}")
            arch = _TAG_TO_ARCH[arch_tag]
            dims = struct.unpack(f"<{ndims}I", _read_exact(buf, 4 * ndims, "dims"))
            (kv_len,) = struct.unpack("<I", _read_exact(buf, 4, "manifest kv length"))
            hyper = _kv_decode(_read_exact(buf, kv_len, "manifest kv block"))
        elif tag == SECTION_NAMED_TENSOR:
            (name_len,) = struct.unpack("<B", _read_exact(buf, 1, "tensor name"))
            name = _read_exact(buf, name_len, "tensor name").decode("utf-8")
            tensors[name] = _read_tensor_body(buf).astype(np.float64)
        else:
            raise TensorFormatError(f"unknown section tag {tag}")
    if arch is None:
        raise TensorFormatError("container has no manifest section")
    return _rebuild(arch, dims, hyper, tensors)


def _rebuild(arch, dims, hyper, tensors):
    if arch == "linear":
        d, m = dims
        eq = LinearEqualizer(
            noise_var=float(hyper.get("noise_var", "0.0")),
            jitter=float(hyper.get("jitter", "1e-10")),
        )
        matrix = tensors["matrix"]
        if matrix.shape != (m, d):
            raise TensorFormatError("matrix shape disagrees with manifest dims")
        eq.matrix_ = matrix
        eq.n_features_in_ = d
        eq.rank_deficient_ = bool(int(hyper.get("rank_deficient", "0")))
        return eq
    if arch == "pfe":
        d, m, n_refs = dims
        eq = PfeEqualizer()
        eq.analysis_ = tensors["analysis"]
        eq.synthesis_ = tensors["synthesis"]
        if eq.analysis_.shape != (n_refs, d) or eq.synthesis_.shape != (n_refs, m):
            raise TensorFormatError("frame shapes disagree with manifest dims")
        eq.n_features_in_ = d
        eq.n_refs_ = n_refs
        return eq
    if arch in ("mlp", "cnn1", "cnn2"):
        snr = hyper.get("snr_align_db", "none")
        kwargs = {
            "arch": arch,
            "snr_align_db": None if snr == "none" else float(snr),
            "fading": bool(int(hyper.get("fading", "0"))),
            "seed": int(hyper.get("seed", "0")),
        }
        if arch == "mlp":
            d, m = dims
        else:
            c, h, w, c_out = dims
            d = c * h * w
            m = c_out * h * w
            kwargs["layout"] = (c, h, w)
        eq = NeuralEqualizer(**kwargs)
        eq.params_ = {k: (v if v.ndim else np.array(float(v))) for k, v in tensors.items()}
        eq.n_features_in_ = d
        eq.n_outputs_ = m
        eq.layout_ = kwargs.get("layout")
        return eq
    raise TensorFormatError(f"unknown architecture {arch!r}")
