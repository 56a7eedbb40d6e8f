import numpy as np
import pytest
from scipy.stats import spearmanr

from oracles import gd_linear_oracle
from semeq.channel import draw_fading, fading_rotate, real_noise_var
from semeq.equalizers import LinearEqualizer
from semeq.errors import DimensionMismatchError, EmptyPilotSetError
from semeq.rng import stream


class TestFit:
    def test_identity_ground_truth(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((20, 6))
        eq = LinearEqualizer(noise_var=0.0).fit(x, x)
        assert np.max(np.abs(eq.matrix_ - np.eye(6))) <= 1e-8
        assert not eq.rank_deficient_

    def test_planted_recovery(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((3, 4))
        x = rng.standard_normal((50, 4))
        eq = LinearEqualizer(noise_var=0.0).fit(x, x @ a.T)
        assert np.linalg.norm(eq.matrix_ - a) / np.linalg.norm(a) <= 1e-8

    def test_objective_beats_gd_oracle(self):
        g = stream(99)
        x = g.standard_normal((100, 8))
        a = g.standard_normal((6, 8))
        y = x @ a.T + 0.3 * g.standard_normal((100, 6))
        nv = real_noise_var(0.0)
        eq = LinearEqualizer(noise_var=nv).fit(x, y)
        f_gd = gd_linear_oracle(x, y, nv)
        assert eq.objective(x, y) <= eq.objective(x, y, matrix=f_gd) + 1e-6
        assert np.linalg.norm(eq.matrix_ - f_gd) / np.linalg.norm(eq.matrix_) <= 1e-3

    def test_rank_deficient_flagged(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((3, 8))  # fewer pilots than dimensions, noiseless
        y = rng.standard_normal((3, 4))
        eq = LinearEqualizer(noise_var=0.0).fit(x, y)
        assert eq.rank_deficient_
        # jittered solution still reproduces the pilots (interpolation regime)
        assert np.max(np.abs(eq.transform(x) - y)) <= 1e-5

    def test_noise_makes_normal_matrix_regular(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((3, 8))
        y = rng.standard_normal((3, 4))
        eq = LinearEqualizer(noise_var=0.5).fit(x, y)
        assert not eq.rank_deficient_

    def test_fading_scaling_matches_manual(self):
        g = stream(5)
        x = g.standard_normal((40, 6))
        y = g.standard_normal((40, 3))
        h = draw_fading(g, 40)
        eq_a = LinearEqualizer(noise_var=0.1).fit(x, y, fading=h)
        eq_b = LinearEqualizer(noise_var=0.1).fit(fading_rotate(x, h), y)
        assert np.allclose(eq_a.matrix_, eq_b.matrix_)

    def test_empty_pilots(self):
        with pytest.raises(EmptyPilotSetError):
            LinearEqualizer().fit(np.zeros((0, 3)), np.zeros((0, 2)))

    def test_row_count_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            LinearEqualizer().fit(np.ones((4, 3)), np.ones((5, 2)))


class TestApply:
    def test_identity_matrix(self):
        eq = LinearEqualizer()
        eq.matrix_ = np.eye(4)
        eq.n_features_in_ = 4
        eq.rank_deficient_ = False
        x = np.arange(8.0).reshape(2, 4)
        assert np.array_equal(eq.transform(x), x)

    def test_zero_matrix(self):
        eq = LinearEqualizer()
        eq.matrix_ = np.zeros((3, 4))
        eq.n_features_in_ = 4
        eq.rank_deficient_ = False
        assert np.array_equal(eq.transform(np.ones((2, 4))), np.zeros((2, 3)))

    def test_planted_generalizes(self):
        rng = np.random.default_rng(6)
        a = rng.standard_normal((3, 4))
        x = rng.standard_normal((50, 4))
        eq = LinearEqualizer(noise_var=0.0).fit(x, x @ a.T)
        fresh = rng.standard_normal((10, 4))
        assert np.max(np.abs(eq.transform(fresh) - fresh @ a.T)) <= 1e-6

    def test_dimension_mismatch(self):
        rng = np.random.default_rng(7)
        eq = LinearEqualizer().fit(rng.standard_normal((10, 4)), rng.standard_normal((10, 2)))
        with pytest.raises(DimensionMismatchError):
            eq.transform(np.ones((2, 5)))

    def test_sklearn_params_round_trip(self):
        eq = LinearEqualizer(noise_var=0.25, jitter=1e-9)
        params = eq.get_params()
        assert params == {"noise_var": 0.25, "jitter": 1e-9}
        clone = LinearEqualizer(**params)
        assert clone.noise_var == 0.25


class TestStatisticalBehavior:
    def test_closed_form_optimality_random_instances(self):
        # 20 instances across dims, pilot counts, SNRs, fading on/off
        worst_gap = -np.inf
        worst_rel = -np.inf
        for i in range(20):
            g = stream(1234, i)
            d = int(g.integers(1, 9)) * 2
            m = int(g.integers(2, 13))
            n = int(g.integers(d, 201))
            snr = (-10.0, 0.0, 20.0)[i % 3]
            nv = real_noise_var(snr)
            x = g.standard_normal((n, d))
            if i % 2:
                x = fading_rotate(x, draw_fading(g, n))
            y = x @ g.standard_normal((m, d)).T + 0.1 * g.standard_normal((n, m))
            eq = LinearEqualizer(noise_var=nv).fit(x, y)
            f_gd = gd_linear_oracle(x, y, nv)
            worst_gap = max(worst_gap, eq.objective(x, y) - eq.objective(x, y, matrix=f_gd))
            worst_rel = max(
                worst_rel,
                np.linalg.norm(eq.matrix_ - f_gd) / np.linalg.norm(eq.matrix_),
            )
        assert worst_gap <= 1e-6
        assert worst_rel <= 1e-3

    def test_mse_monotone_in_pilot_count(self):
        # Spearman correlation between pilot count and held-out MSE <= -0.9,
        # averaged over 10 seeds, planted linear task with noise
        d, m = 8, 6
        grid = [d, 2 * d, 4 * d, 8 * d]
        nv = real_noise_var(10.0)
        per_seed = np.zeros((10, len(grid)))
        for s in range(10):
            g = stream(777, s)
            a = g.standard_normal((m, d))
            x_eval = g.standard_normal((500, d))
            noise_eval = g.standard_normal((500, d)) * np.sqrt(nv)
            for j, n in enumerate(grid):
                x = g.standard_normal((n, d))
                y = x @ a.T
                eq = LinearEqualizer(noise_var=nv).fit(x, y)
                pred = eq.transform(x_eval + noise_eval)
                per_seed[s, j] = np.mean((pred - x_eval @ a.T) ** 2)
        mean_mse = per_seed.mean(axis=0)
        rho, _ = spearmanr(grid, mean_mse)
        assert rho <= -0.9
