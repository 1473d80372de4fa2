import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ewagg.signals import (
    SIGNAL_NAMES,
    CovarianceEstimate,
    NoiseModel,
    dct_forward,
    dct_inverse,
    dct_matrix,
    empirical_norm_sq,
    make_test_signal,
    replication_seed,
    sample_observation,
)


def naive_dct(v):
    # independent O(n^2) cosine-sum oracle for the normalized DCT-II
    n = len(v)
    out = np.empty(n)
    i = np.arange(n)
    for k in range(n):
        basis = np.cos(np.pi * k * (2 * i + 1) / (2 * n))
        scale = np.sqrt(1.0 / n**2) if k == 0 else np.sqrt(2.0 / n**2)
        out[k] = scale * np.dot(basis, v)
    return out


class TestDCT:
    def test_constant_vector(self):
        out = dct_forward(np.array([3.0, 3.0, 3.0, 3.0]))
        np.testing.assert_allclose(out, [3.0, 0.0, 0.0, 0.0], atol=1e-12)

    def test_matches_cosine_sum_oracle(self, rng):
        v = rng.standard_normal(17)
        np.testing.assert_allclose(dct_forward(v), naive_dct(v), atol=1e-10)

    def test_round_trip(self, rng):
        v = rng.standard_normal(64)
        np.testing.assert_allclose(dct_inverse(dct_forward(v)), v, atol=1e-10)

    def test_parseval(self, rng):
        v = rng.standard_normal(50)
        assert np.sum(dct_forward(v) ** 2) == pytest.approx(empirical_norm_sq(v), abs=1e-12)

    def test_matrix_row_scaling(self):
        d = dct_matrix(8)
        np.testing.assert_allclose(d @ d.T, np.eye(8) / 8, atol=1e-12)

    def test_matrix_agrees_with_transform(self, rng):
        v = rng.standard_normal(12)
        np.testing.assert_allclose(dct_matrix(12) @ v, dct_forward(v), atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=64))
    def test_round_trip_property(self, vals):
        v = np.asarray(vals)
        np.testing.assert_allclose(dct_inverse(dct_forward(v)), v,
                                   atol=1e-6 * (1 + np.abs(v).max()))


class TestSignals:
    @pytest.mark.parametrize("name", SIGNAL_NAMES)
    @pytest.mark.parametrize("n", [256, 512])
    def test_unit_empirical_norm(self, name, n):
        f = make_test_signal(name, n)
        assert empirical_norm_sq(f.values) == pytest.approx(1.0, abs=1e-12)
        assert len(f.values) == n

    @pytest.mark.parametrize("name", SIGNAL_NAMES)
    def test_smooth_unit_norm(self, name):
        f = make_test_signal(name, 256, smooth=True)
        assert empirical_norm_sq(f.values) == pytest.approx(1.0, abs=1e-12)

    def test_blocks_piecewise_constant(self):
        f = make_test_signal("Blocks", 256)
        assert len(np.unique(np.round(f.values, 12))) <= 12

    def test_smooth_blocks_slope_changes(self):
        # antiderivative of a piecewise-constant signal is piecewise linear;
        # its slope changes sign where the level crosses zero
        f = make_test_signal("Blocks", 256, smooth=True)
        slopes = np.sign(np.diff(f.values))
        changes = np.count_nonzero(np.diff(slopes[slopes != 0]))
        assert changes == 6

    def test_unknown_name_raises(self):
        with pytest.raises((KeyError, ValueError)):
            make_test_signal("NotASignal", 256)

    def test_determinism(self):
        a = make_test_signal("Doppler", 512).values
        b = make_test_signal("Doppler", 512).values
        np.testing.assert_array_equal(a, b)


class TestNoise:
    def test_replication_seed_reproducible(self):
        s1 = np.random.default_rng(replication_seed(5, 3)).standard_normal(8)
        s2 = np.random.default_rng(replication_seed(5, 3)).standard_normal(8)
        s3 = np.random.default_rng(replication_seed(5, 4)).standard_normal(8)
        np.testing.assert_array_equal(s1, s2)
        assert not np.array_equal(s1, s3)

    def test_sample_observation_moments(self):
        n, sigma = 16, 0.5
        f = make_test_signal("Ramp", n)
        noise = NoiseModel.iid(sigma, n)
        draws = np.array([sample_observation(f, noise, replication_seed(0, r))
                          for r in range(4000)])
        np.testing.assert_allclose(draws.mean(axis=0), f.values, atol=0.05)
        np.testing.assert_allclose(draws.var(axis=0), sigma**2, rtol=0.15)

    def test_heteroscedastic_variances(self):
        variances = np.array([0.1, 0.4, 1.0, 2.5])
        noise = NoiseModel.from_diagonal(variances)
        draws = np.array([sample_observation(np.zeros(4), noise, replication_seed(1, r))
                          for r in range(6000)])
        np.testing.assert_allclose(draws.var(axis=0), variances, rtol=0.15)
        assert noise.spectral_norm_bound == pytest.approx(2.5)

    def test_covariance_estimate_exact(self):
        noise = NoiseModel.iid(0.33, 8)
        est = CovarianceEstimate.exact(noise)
        np.testing.assert_allclose(np.diag(est.matrix), 0.33**2)
