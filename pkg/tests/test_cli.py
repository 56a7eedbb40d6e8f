import numpy as np
import pytest

from semeq.cli import main
from semeq.equalizers import load_equalizer


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParams:
    def test_reference_table(self, capsys):
        code, out, _ = run_cli(capsys, "params")
        assert code == 0
        for value in ("84,934,656", "169,887,745", "6,416", "12,833"):
            assert value in out

    def test_custom_dims(self, capsys):
        code, out, _ = run_cli(capsys, "params", "--d", "4", "--m", "3", "--channels", "2")
        assert code == 0
        assert "12" in out  # linear 4*3


class TestGenFitEval:
    def test_round_trip(self, tmp_path, capsys):
        prefix = str(tmp_path / "demo")
        code, out, _ = run_cli(
            capsys, "gen", "--scenario", "mismatch", "--family", "orthogonal",
            "--d", "8", "--count", "120", "--eval-count", "40", "--out", prefix,
        )
        assert code == 0
        eq_path = str(tmp_path / "lin.seql")
        code, out, _ = run_cli(
            capsys, "fit", "--pilots", f"{prefix}_train.seql", "--equalizer", "linear",
            "--snr-align", "10", "--out", eq_path,
        )
        assert code == 0
        eq = load_equalizer(eq_path)
        assert eq.matrix_.shape == (8, 8)
        code, out, _ = run_cli(
            capsys, "eval", "--equalizer", eq_path, "--data", f"{prefix}_eval.seql",
            "--snr", "10",
        )
        assert code == 0
        assert "mean_psnr=" in out and "mean_mse=" in out

    def test_fit_pfe_and_neural(self, tmp_path, capsys):
        prefix = str(tmp_path / "demo")
        run_cli(
            capsys, "gen", "--scenario", "mismatch", "--family", "conv-local",
            "--d", "32", "--layout", "2,4,4", "--count", "64", "--eval-count", "16",
            "--out", prefix,
        )
        code, _, _ = run_cli(
            capsys, "fit", "--pilots", f"{prefix}_train.seql", "--equalizer", "pfe",
            "--out", str(tmp_path / "pfe.seql"),
        )
        assert code == 0
        code, _, _ = run_cli(
            capsys, "fit", "--pilots", f"{prefix}_train.seql", "--equalizer", "cnn1",
            "--layout", "2,4,4", "--max-epochs", "3", "--out", str(tmp_path / "cnn.seql"),
        )
        assert code == 0

    def test_gen_with_fading_attaches_coefficients(self, tmp_path, capsys):
        from semeq.tensorio import read_pilot_set

        prefix = str(tmp_path / "fad")
        code, _, _ = run_cli(
            capsys, "gen", "--scenario", "mismatch", "--family", "orthogonal",
            "--d", "6", "--count", "30", "--eval-count", "5", "--fading", "--out", prefix,
        )
        assert code == 0
        _, _, fading = read_pilot_set(f"{prefix}_train.seql")
        assert fading is not None and len(fading) == 30


class TestSweeps:
    def write_config(self, path, **extra):
        lines = [
            "scenario = mismatch",
            "family = orthogonal",
            "d = 8",
            "pool_size = 100",
            "eval_size = 30",
            "equalizer = linear",
            "equalizer = pfe",
            "pilots = 8",
            "snr_align = 10",
            "seed = 42",
        ]
        lines += [f"{k} = {v}" for k, v in extra.items()]
        path.write_text("\n".join(lines) + "\n")

    def test_sweep_pilots_writes_csv(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.txt"
        self.write_config(cfg)
        out = tmp_path / "sweep.csv"
        code, _, _ = run_cli(capsys, "sweep-pilots", "--config", str(cfg), "--out", str(out))
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("equalizer,")
        assert len(lines) == 1 + 2 + 2  # header + per-seed rows + aggregates

    def test_sweep_snr_writes_csv(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.txt"
        self.write_config(cfg)
        out = tmp_path / "snr.csv"
        code, _, _ = run_cli(capsys, "sweep-snr", "--config", str(cfg), "--out", str(out))
        assert code == 0
        assert out.exists()

    def test_missing_out_is_validation_error(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.txt"
        self.write_config(cfg)
        code, _, err = run_cli(capsys, "sweep-pilots", "--config", str(cfg))
        assert code == 1
        assert "out" in err


class TestExitCodes:
    def test_success_is_zero(self, capsys):
        code, _, _ = run_cli(capsys, "params")
        assert code == 0

    def test_bad_flag_is_one(self, capsys):
        code, _, err = run_cli(capsys, "gen", "--scenario", "bogus", "--out", "/tmp/x")
        assert code == 1

    def test_bad_config_value_is_one(self, tmp_path, capsys):
        cfg = tmp_path / "bad.txt"
        cfg.write_text("equalizer = ridge\n")
        code, _, err = run_cli(capsys, "sweep-pilots", "--config", str(cfg), "--out", "/tmp/x.csv")
        assert code == 1
        assert "ridge" in err

    def test_missing_file_is_two(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "fit", "--pilots", str(tmp_path / "nope.seql"),
            "--equalizer", "linear", "--out", str(tmp_path / "o.seql"),
        )
        assert code == 2
