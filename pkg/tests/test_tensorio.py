import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semeq import tensorio
from semeq.errors import (
    BadMagicError,
    NonFiniteValueError,
    TensorFormatError,
    TruncatedFileError,
    UnsupportedVersionError,
)


class TestTensorRoundTrip:
    def test_random_3d_bit_identical(self, tmp_path):
        rng = np.random.default_rng(0)
        t = rng.standard_normal((16, 24, 24)).astype(np.float32)
        path = tmp_path / "t.seql"
        tensorio.write_tensor(path, t)
        back = tensorio.read_tensor(path)
        assert back.dtype == np.float32
        assert back.shape == t.shape
        assert back.tobytes() == t.tobytes()

    def test_scalar_and_1d(self, tmp_path):
        path = tmp_path / "s.seql"
        tensorio.write_tensor(path, np.float32(3.5))
        assert tensorio.read_tensor(path) == np.float32(3.5)
        tensorio.write_tensor(path, np.array([1.0, 2.0], dtype=np.float32))
        assert tensorio.read_tensor(path).tolist() == [1.0, 2.0]

    @given(
        st.lists(
            st.floats(width=32, allow_nan=False, allow_infinity=False),
            min_size=1,
            max_size=64,
        )
    )
    @settings(max_examples=60, deadline=None)
    def test_every_finite_float32_survives(self, values):
        # includes signed zeros and subnormals
        import tempfile
        from pathlib import Path

        t = np.array(values, dtype=np.float32)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "v.seql"
            tensorio.write_tensor(path, t)
            assert tensorio.read_tensor(path).tobytes() == t.tobytes()

    def test_subnormal_and_signed_zero(self, tmp_path):
        t = np.array([-0.0, 0.0, 1e-45, -1e-45], dtype=np.float32)
        path = tmp_path / "z.seql"
        tensorio.write_tensor(path, t)
        assert tensorio.read_tensor(path).tobytes() == t.tobytes()


class TestTensorErrors:
    def test_four_byte_file_bad_magic(self, tmp_path):
        path = tmp_path / "bad.seql"
        path.write_bytes(b"\x00\x01\x02\x03")
        with pytest.raises(BadMagicError):
            tensorio.read_tensor(path)

    def test_nan_payload_rejected(self, tmp_path):
        path = tmp_path / "nan.seql"
        header = tensorio.MAGIC + struct.pack("<HBB", 1, 0, 1) + struct.pack("<I", 1)
        path.write_bytes(header + struct.pack("<f", float("nan")))
        with pytest.raises(NonFiniteValueError):
            tensorio.read_tensor(path)

    def test_nan_write_rejected(self, tmp_path):
        with pytest.raises(NonFiniteValueError):
            tensorio.write_tensor(tmp_path / "x.seql", np.array([np.nan]))

    def test_overflowing_float64_write_rejected(self, tmp_path):
        with pytest.raises(NonFiniteValueError):
            tensorio.write_tensor(tmp_path / "x.seql", np.array([1e300]))

    def test_unsupported_version(self, tmp_path):
        path = tmp_path / "v9.seql"
        path.write_bytes(tensorio.MAGIC + struct.pack("<HBB", 9, 0, 0))
        with pytest.raises(UnsupportedVersionError):
            tensorio.read_tensor(path)

    def test_unknown_dtype_code(self, tmp_path):
        path = tmp_path / "dt.seql"
        path.write_bytes(tensorio.MAGIC + struct.pack("<HBB", 1, 7, 0))
        with pytest.raises(UnsupportedVersionError):
            tensorio.read_tensor(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "trunc.seql"
        header = tensorio.MAGIC + struct.pack("<HBB", 1, 0, 1) + struct.pack("<I", 4)
        path.write_bytes(header + b"\x00" * 7)  # needs 16 payload bytes
        with pytest.raises(TruncatedFileError):
            tensorio.read_tensor(path)

    def test_trailing_garbage(self, tmp_path):
        path = tmp_path / "trail.seql"
        tensorio.write_tensor(path, np.ones(2, dtype=np.float32))
        path.write_bytes(path.read_bytes() + b"xx")
        with pytest.raises(TensorFormatError):
            tensorio.read_tensor(path)


class TestPilotContainer:
    def test_round_trip_with_fading(self, tmp_path):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((10, 4)).astype(np.float32)
        y = rng.standard_normal((10, 6)).astype(np.float32)
        h = (rng.standard_normal(10) + 1j * rng.standard_normal(10)).astype(np.complex64)
        path = tmp_path / "p.seql"
        tensorio.write_pilot_set(path, x, y, fading=h.astype(np.complex128))
        xr, yr, hr = tensorio.read_pilot_set(path)
        assert np.array_equal(xr.astype(np.float32), x)
        assert np.array_equal(yr.astype(np.float32), y)
        assert np.allclose(hr, h, atol=1e-7)

    def test_round_trip_without_fading(self, tmp_path):
        x = np.ones((3, 2), dtype=np.float32)
        y = np.zeros((3, 2), dtype=np.float32)
        path = tmp_path / "p2.seql"
        tensorio.write_pilot_set(path, x, y)
        xr, yr, hr = tensorio.read_pilot_set(path)
        assert hr is None
        assert np.array_equal(xr.astype(np.float32), x)

    def test_tensor_reader_rejects_container(self, tmp_path):
        path = tmp_path / "p3.seql"
        tensorio.write_pilot_set(path, np.ones((2, 2)), np.ones((2, 2)))
        with pytest.raises(UnsupportedVersionError):
            tensorio.read_tensor(path)

    def test_container_reader_rejects_tensor(self, tmp_path):
        path = tmp_path / "t.seql"
        tensorio.write_tensor(path, np.ones(2))
        with pytest.raises(UnsupportedVersionError):
            tensorio.read_pilot_set(path)
