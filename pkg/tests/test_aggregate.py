import numpy as np
import pytest
from scipy.special import softmax

from ewagg.aggregate import (
    BlockPartition,
    DegeneratePosteriorError,
    Prior,
    build_partition,
    ewa_aggregate,
    ewa_weights,
    gewa_aggregate,
    kl_divergence,
    min_temperature,
    oracle_bound_check,
    sewa_aggregate,
    strict_floor,
)
from ewagg.estimators import geometric_grid, pinsker_family, symmetrize
from ewagg.risk import family_unbiased_risks
from ewagg.signals import (
    CovarianceEstimate,
    NoiseModel,
    make_test_signal,
    replication_seed,
    sample_observation,
)

SIGMA = 0.33


def small_family(n=32):
    return pinsker_family(n, geometric_grid(0.3, 10, 4), geometric_grid(1, n, 5))


class TestWeights:
    def test_matches_softmax_oracle(self, rng):
        risks = rng.standard_normal(20)
        n, beta = 64, 0.5
        post = ewa_weights(risks, beta, Prior.uniform(20), n)
        np.testing.assert_allclose(post.weights, softmax(-(n / beta) * risks), atol=1e-12)

    def test_prior_tilts_posterior(self, rng):
        risks = np.zeros(4)
        prior = Prior.weighted(np.array([0.4, 0.3, 0.2, 0.1]))
        post = ewa_weights(risks, 1.0, prior, 8)
        np.testing.assert_allclose(post.weights, prior.weights, atol=1e-12)

    def test_zero_prior_mass_stays_zero(self):
        prior = Prior.weighted(np.array([0.5, 0.5, 0.0]))
        post = ewa_weights(np.array([1.0, 2.0, -10.0]), 1.0, prior, 16)
        assert post.weights[2] == 0.0

    def test_all_infinite_raises(self):
        with pytest.raises(DegeneratePosteriorError):
            ewa_weights(np.array([np.inf, np.inf]), 1.0, Prior.uniform(2), 8)

    def test_normalization(self, rng):
        post = ewa_weights(rng.standard_normal(50), 0.87, Prior.uniform(50), 128)
        assert post.weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_flat_limit_recovers_prior(self, rng):
        prior = Prior.weighted(rng.uniform(0.1, 1.0, 30))
        post = ewa_weights(rng.standard_normal(30), 1e12, prior, 256)
        assert np.abs(post.weights - prior.weights).max() < 1e-6

    def test_sharp_limit_is_argmin(self, rng):
        risks = rng.standard_normal(30)
        post = ewa_weights(risks, 1e-9, Prior.uniform(30), 256)
        assert post.weights[np.argmin(risks)] == pytest.approx(1.0, abs=1e-9)

    def test_min_temperature(self):
        assert min_temperature(SIGMA, 1) == pytest.approx(8 * SIGMA**2)
        assert min_temperature(SIGMA, 2) == pytest.approx(4 * SIGMA**2)
        noise = NoiseModel.from_diagonal(np.array([0.1, 0.9, 0.4]))
        assert min_temperature(noise, 1) == pytest.approx(8 * 0.9)


class TestPriors:
    def test_uniform(self):
        np.testing.assert_allclose(Prior.uniform(5).weights, 0.2)

    def test_sparsity_positive_and_normalized(self):
        grid = np.stack([np.geomspace(0.1, 100, 12), np.geomspace(1, 64, 12)], axis=1)
        prior = Prior.sparsity(grid, tau=2.0)
        assert np.all(prior.weights > 0)
        assert prior.weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_sparsity_favors_small_parameters(self):
        grid = np.array([[0.5], [50.0]])
        prior = Prior.sparsity(grid, tau=1.0)
        assert prior.weights[0] > prior.weights[1]


class TestKL:
    def test_identical_measures(self):
        p = np.array([0.2, 0.3, 0.5])
        assert kl_divergence(p, p) == pytest.approx(0.0, abs=1e-14)

    def test_hand_computed_value(self):
        p = np.array([0.75, 0.25])
        q = np.array([0.5, 0.5])
        expected = 0.75 * np.log(1.5) + 0.25 * np.log(0.5)
        assert kl_divergence(p, q) == pytest.approx(expected, rel=1e-12)

    def test_nonnegative(self, rng):
        for _ in range(20):
            p = rng.dirichlet(np.ones(6))
            q = rng.dirichlet(np.ones(6))
            assert kl_divergence(p, q) >= -1e-12


class TestPartition:
    def test_strict_floor(self):
        assert strict_floor(2.0) == 1
        assert strict_floor(2.5) == 2
        assert strict_floor(3.0) == 2

    def test_pinned_boundaries(self):
        assert build_partition(100, 3).boundaries == (0, 3, 5, 8, 13, 23, 40, 68, 100)

    def test_small_n_clamps(self):
        assert build_partition(4, 3).boundaries == (0, 3, 4)

    def test_nu_one_covers_everything(self):
        part = build_partition(40, 1)
        bounds = np.array(part.boundaries)
        assert bounds[0] == 0 and bounds[-1] == 40
        assert np.all(np.diff(bounds) >= 1)

    def test_slices_partition_coordinates(self):
        part = build_partition(64, 5)
        covered = np.concatenate([np.arange(s.start, s.stop) for s in part.slices()])
        np.testing.assert_array_equal(np.sort(covered), np.arange(64))


class TestEWA:
    def _observation(self, n=32, seed=0):
        f = make_test_signal("HeaviSine", n)
        noise = NoiseModel.iid(SIGMA, n)
        y = sample_observation(f, noise, replication_seed(11, seed))
        return f, noise, y

    def test_aggregate_is_posterior_mean(self):
        n = 32
        fam = small_family(n)
        f, noise, y = self._observation(n)
        sigma_hat = CovarianceEstimate.exact(noise)
        beta = 8 * SIGMA**2
        agg, post = ewa_aggregate(fam, y, beta, Prior.uniform(len(fam.members)),
                                  sigma_hat=sigma_hat)
        # manual oracle: weight each member prediction by the posterior
        stack = np.stack([m.apply(y) for m in fam.members])
        np.testing.assert_allclose(agg, post.weights @ stack, atol=1e-10)

    def test_posterior_uses_unbiased_risks(self):
        n = 32
        fam = small_family(n)
        _, noise, y = self._observation(n)
        sigma_hat = CovarianceEstimate.exact(noise)
        beta = 8 * SIGMA**2
        _, post = ewa_aggregate(fam, y, beta, Prior.uniform(len(fam.members)),
                                sigma_hat=sigma_hat)
        risks = family_unbiased_risks(fam, y, sigma_hat)
        expected = ewa_weights(risks, beta, Prior.uniform(len(fam.members)), n)
        np.testing.assert_allclose(post.weights, expected.weights, atol=1e-12)

    def test_sewa_symmetrized_members(self):
        n = 32
        fam = small_family(n)
        _, noise, y = self._observation(n)
        sigma_hat = CovarianceEstimate.exact(noise)
        beta = 4 * SIGMA**2
        agg, post = sewa_aggregate(fam, y, beta, Prior.uniform(len(fam.members)),
                                   sigma_hat=sigma_hat)
        sym = [symmetrize(m) for m in fam.members]
        stack = np.stack([m.apply(y) for m in sym])
        np.testing.assert_allclose(agg, post.weights @ stack, atol=1e-10)

    def test_gewa_single_block_equals_ewa(self):
        n = 32
        fam = small_family(n)
        _, noise, y = self._observation(n)
        sigma_hat = CovarianceEstimate.exact(noise)
        beta = 8 * SIGMA**2
        agg_e, _ = ewa_aggregate(fam, y, beta, Prior.uniform(len(fam.members)),
                                 sigma_hat=sigma_hat)
        part = BlockPartition(boundaries=(0, n))
        agg_g, _ = gewa_aggregate(fam, y, part, beta, Prior.uniform(len(fam.members)),
                                  sigma_hat=sigma_hat)
        np.testing.assert_allclose(agg_g, agg_e, atol=1e-12)

    def test_gewa_two_blocks_manual_oracle(self, rng):
        # sequence-space problem: identity-basis diagonal filters are
        # block-diagonal for any coordinate partition
        from ewagg.estimators import AffineEstimator, EstimatorFamily

        n = 32
        dfam = small_family(n)
        w = dfam.weights_matrix()
        fam = EstimatorFamily(
            members=tuple(AffineEstimator(weights=row, basis="identity") for row in w)
        )
        s2 = SIGMA**2 / n
        y = rng.standard_normal(n)
        sigma_hat = np.full(n, s2)
        beta = 8 * s2 * n  # keep above the per-block temperature floor
        part = BlockPartition(boundaries=(0, 12, n))
        agg, posts = gewa_aggregate(fam, y, part, beta, Prior.uniform(w.shape[0]),
                                    sigma_hat=sigma_hat)
        expected = np.empty(n)
        for sl in part.slices():
            resid = ((1.0 - w[:, sl]) ** 2) @ y[sl] ** 2
            risks = (resid + 2.0 * s2 * w[:, sl].sum(axis=1) - s2 * (sl.stop - sl.start)) / n
            post = ewa_weights(risks, beta, Prior.uniform(w.shape[0]), n)
            expected[sl] = (post.weights @ w[:, sl]) * y[sl]
        np.testing.assert_allclose(agg, expected, atol=1e-10)


class TestOracleBound:
    def test_bound_holds_on_small_family(self):
        n = 64
        fam = pinsker_family(n, geometric_grid(0.5, 8, 5), geometric_grid(1, n, 5))
        f = make_test_signal("Ramp", n)
        noise = NoiseModel.iid(SIGMA, n)
        report = oracle_bound_check(fam, f, noise, beta=8 * SIGMA**2,
                                    prior=Prior.uniform(len(fam.members)),
                                    n_mc=400, base_seed=5)
        assert report.passed
        assert report.lhs <= report.rhs + 3 * report.lhs_se
