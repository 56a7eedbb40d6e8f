import numpy as np
import pytest

from semeq.equalizers import (
    LinearEqualizer,
    NeuralEqualizer,
    PfeEqualizer,
    load_equalizer,
    save_equalizer,
)
from semeq.errors import TensorFormatError, UnsupportedVersionError
from semeq.latents import MismatchSpec, generate_mismatch

F32 = 1e-5  # containers store binary32, so reloads match to single precision


class TestLinearRoundTrip:
    def test_matrix_and_flags(self, tmp_path):
        rng = np.random.default_rng(0)
        eq = LinearEqualizer(noise_var=0.05).fit(
            rng.standard_normal((20, 6)), rng.standard_normal((20, 4))
        )
        path = tmp_path / "lin.seql"
        save_equalizer(path, eq)
        back = load_equalizer(path)
        assert isinstance(back, LinearEqualizer)
        assert back.noise_var == pytest.approx(0.05)
        assert back.rank_deficient_ == eq.rank_deficient_
        assert np.max(np.abs(back.matrix_ - eq.matrix_)) <= F32 * np.max(np.abs(eq.matrix_))
        x = rng.standard_normal((5, 6))
        assert np.allclose(back.transform(x), eq.transform(x), atol=1e-4)


class TestNeuralRoundTrip:
    @pytest.mark.parametrize("arch,layout", [("mlp", None), ("cnn1", (2, 4, 4)), ("cnn2", (2, 4, 4))])
    def test_params_survive(self, tmp_path, arch, layout):
        d = 32 if layout else 8
        spec = MismatchSpec("general-linear", d, d, 1, 2)
        train, _ = generate_mismatch(spec, 16, 0)
        eq = NeuralEqualizer(arch=arch, layout=layout, snr_align_db=7.0, max_epochs=3, seed=1)
        eq.fit(train.x, train.y)
        path = tmp_path / f"{arch}.seql"
        save_equalizer(path, eq)
        back = load_equalizer(path)
        assert isinstance(back, NeuralEqualizer)
        assert back.arch == arch
        assert back.snr_align_db == pytest.approx(7.0)
        for key, value in eq.params_.items():
            assert np.allclose(back.params_[key], value, atol=F32 * (1 + np.max(np.abs(value))))
        x = train.x[:3]
        assert np.allclose(back.transform(x), eq.transform(x), atol=1e-3)


class TestPfeRoundTrip:
    def test_frames_survive(self, tmp_path):
        rng = np.random.default_rng(2)
        eq = PfeEqualizer().fit(rng.standard_normal((8, 4)), rng.standard_normal((8, 6)))
        path = tmp_path / "pfe.seql"
        save_equalizer(path, eq)
        back = load_equalizer(path)
        assert isinstance(back, PfeEqualizer)
        assert back.n_refs_ == 8
        x = rng.standard_normal((3, 4))
        assert np.allclose(back.transform(back.pre_transform(x)), eq.round_trip(x), atol=1e-4)


class TestErrors:
    def test_wrong_container_kind(self, tmp_path):
        from semeq.tensorio import write_pilot_set

        path = tmp_path / "p.seql"
        write_pilot_set(path, np.ones((2, 2)), np.ones((2, 2)))
        with pytest.raises(UnsupportedVersionError):
            load_equalizer(path)

    def test_missing_manifest(self, tmp_path):
        from semeq.tensorio import FORMAT_EQUALIZER, MAGIC
        import struct

        path = tmp_path / "bad.seql"
        path.write_bytes(MAGIC + struct.pack("<HB", 1, FORMAT_EQUALIZER))
        with pytest.raises(TensorFormatError):
            load_equalizer(path)
