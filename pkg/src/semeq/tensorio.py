"""SEQL binary tensor files (little-endian throughout).

Single tensor::

    magic 'SEQL' | u16 version = 1 | u8 format code (0 = float32 tensor) |
    u8 ndim | ndim x u32 shape | row-major float32 payload

Container files reuse the same 7-byte prefix with a format code >= 0x80:

* ``0x81`` pilot set. Body is a sequence of tagged sections, each a
  ``u8 tag`` followed by a tensor body (u8 dtype, u8 ndim, shape, payload).
  Tags: 1 = X (N x d), 2 = Y (N x m), 3 = H (N x 2, fading re/im).
* ``0x82`` equalizer (see :mod:`semeq.equalizers.io`). Body is a manifest
  section followed by named tensor sections.

Payloads are IEEE-754 binary32; a write request with values that are not
finite in binary32 is rejected, and a reader rejects any non-finite
payload it encounters.
"""

import io
import struct

import numpy as np

from .errors import (
    BadMagicError,
    NonFiniteValueError,
    TensorFormatError,
    TruncatedFileError,
    UnsupportedVersionError,
    ValidationError,
)

MAGIC = b"SEQL"
VERSION = 1

FORMAT_TENSOR_F32 = 0
FORMAT_PILOT_SET = 0x81
FORMAT_EQUALIZER = 0x82

SECTION_X = 1
SECTION_Y = 2
SECTION_H = 3

MAX_NDIM = 8


def _to_f32(array, name="tensor"):
    arr = np.asarray(array)
    if arr.ndim > MAX_NDIM:
        raise ValidationError(f"{name} has {arr.ndim} dims, format limit is {MAX_NDIM}")
    if any(s > 0xFFFFFFFF for s in arr.shape):
        raise ValidationError(f"{name} dimension exceeds u32 range")
    with np.errstate(over="ignore"):  # overflow is reported as the error below
        out = np.ascontiguousarray(arr, dtype="<f4")
    if not np.all(np.isfinite(out)):
        raise NonFiniteValueError(f"{name} is not finite in binary32")
    return out


def _write_tensor_body(buf, arr):
    buf.write(struct.pack("<BB", FORMAT_TENSOR_F32, arr.ndim))
    for s in arr.shape:
        buf.write(struct.pack("<I", s))
    buf.write(arr.tobytes(order="C"))


def _read_exact(buf, n, what):
    data = buf.read(n)
    if len(data) != n:
        raise TruncatedFileError(f"file ended while reading {what}")
    return data


def _read_tensor_body(buf):
    code, ndim = struct.unpack("<BB", _read_exact(buf, 2, "tensor header"))
    if code != FORMAT_TENSOR_F32:
        raise UnsupportedVersionError(f"unknown dtype/format code {code}")
    if ndim > MAX_NDIM:
        raise TensorFormatError(f"ndim {ndim} exceeds format limit {MAX_NDIM}")
    shape = struct.unpack(f"<{ndim}I", _read_exact(buf, 4 * ndim, "tensor shape"))
    count = 1
    for s in shape:
        count *= s
    payload = _read_exact(buf, 4 * count, "tensor payload")
    arr = np.frombuffer(payload, dtype="<f4").reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValueError("tensor payload contains non-finite values")
    return arr.copy()


def _write_header(buf, format_code):
    buf.write(MAGIC)
    buf.write(struct.pack("<HB", VERSION, format_code))


def _read_header(buf):
    magic = buf.read(4)
    if magic != MAGIC:
        raise BadMagicError("not a SEQL file")
    version, code = struct.unpack("<HB", _read_exact(buf, 3, "file header"))
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported version {version}")
    return code


def write_tensor(path, array):
    """Write a single tensor; stored as binary32, bit-exact round trip."""
    arr = _to_f32(array)
    buf = io.BytesIO()
    _write_header(buf, FORMAT_TENSOR_F32)
    buf.write(struct.pack("<B", arr.ndim))
    for s in arr.shape:
        buf.write(struct.pack("<I", s))
    buf.write(arr.tobytes(order="C"))
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def read_tensor(path):
    """Read a single-tensor file written by :func:`write_tensor`."""
    with open(path, "rb") as fh:
        data = fh.read()
    buf = io.BytesIO(data)
    code = _read_header(buf)
    if code != FORMAT_TENSOR_F32:
        raise UnsupportedVersionError(f"file is not a plain tensor (code {code})")
    (ndim,) = struct.unpack("<B", _read_exact(buf, 1, "ndim"))
    if ndim > MAX_NDIM:
        raise TensorFormatError(f"ndim {ndim} exceeds format limit {MAX_NDIM}")
    shape = struct.unpack(f"<{ndim}I", _read_exact(buf, 4 * ndim, "shape"))
    count = 1
    for s in shape:
        count *= s
    payload = _read_exact(buf, 4 * count, "payload")
    if buf.read(1):
        raise TensorFormatError("trailing bytes after payload")
    arr = np.frombuffer(payload, dtype="<f4").reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValueError("tensor payload contains non-finite values")
    return arr.copy()


def write_pilot_set(path, x, y, fading=None):
    """Write paired latents (and optional fading) as a pilot container."""
    x32 = _to_f32(x, "X")
    y32 = _to_f32(y, "Y")
    if x32.ndim != 2 or y32.ndim != 2 or x32.shape[0] != y32.shape[0]:
        raise ValidationError("X and Y must be 2-D with matching row counts")
    buf = io.BytesIO()
    _write_header(buf, FORMAT_PILOT_SET)
    buf.write(struct.pack("<B", SECTION_X))
    _write_tensor_body(buf, x32)
    buf.write(struct.pack("<B", SECTION_Y))
    _write_tensor_body(buf, y32)
    if fading is not None:
        h = np.asarray(fading, dtype=np.complex128)
        if h.shape != (x32.shape[0],):
            raise ValidationError("fading must hold one coefficient per pair")
        h32 = _to_f32(np.column_stack([h.real, h.imag]), "H")
        buf.write(struct.pack("<B", SECTION_H))
        _write_tensor_body(buf, h32)
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def read_pilot_set(path):
    """Read a pilot container; returns (X, Y, fading-or-None) as float64."""
    with open(path, "rb") as fh:
        data = fh.read()
    buf = io.BytesIO(data)
    code = _read_header(buf)
    if code != FORMAT_PILOT_SET:
        raise UnsupportedVersionError(f"file is not a pilot set (code {code})")
    sections = {}
    while True:
        tag_byte = buf.read(1)
        if not tag_byte:
            break
        tag = tag_byte[0]
        if tag in sections:
            raise TensorFormatError(f"duplicate section tag {tag}")
        sections[tag] = _read_tensor_body(buf)
    if SECTION_X not in sections or SECTION_Y not in sections:
        raise TensorFormatError("pilot set must contain X and Y sections")
    x = sections[SECTION_X].astype(np.float64)
    y = sections[SECTION_Y].astype(np.float64)
    if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
        raise TensorFormatError("X and Y sections have inconsistent shapes")
    fading = None
    if SECTION_H in sections:
        h = sections[SECTION_H].astype(np.float64)
        if h.ndim != 2 or h.shape != (x.shape[0], 2):
            raise TensorFormatError("H section must be N x 2")
        fading = h[:, 0] + 1j * h[:, 1]
    return x, y, fading
