import numpy as np
import pytest
from scipy import integrate

from spikeslab.oracle import (MAX_EXACT_DIM, decomposition_consistency_check, enumerate_exact_posterior,
                              exact_marginal_density, exact_marginal_query, pattern_masks,
                              quadrature_pattern_weights, sample_exact, wasserstein_to_exact)
from spikeslab.potential import decompose, potential_terms
from spikeslab.prior import GaussianSlab, GenericSlab, LaplaceSlab, RegressionInstance, SpikeSlabPrior
from spikeslab.samplers import ChainConfig, MalaMethod, two_stage_sample
from spikeslab.utils import PreconditionError


def random_instance(n: int, d: int, seed: int, scale: float = 1.0) -> RegressionInstance:
    rng = np.random.default_rng(seed)
    X = rng.normal(0.0, scale, (n, d))
    theta = np.zeros(d)
    theta[0] = 1.0
    return RegressionInstance(X=X, y=X @ theta + rng.standard_normal(n), noise_std=1.0)


@pytest.fixture(scope='module')
def posterior(small_instance):
    return enumerate_exact_posterior(small_instance, SpikeSlabPrior(q=0.4, slab=GaussianSlab()))


class TestEnumeration:

    def test_pattern_masks(self):
        masks = pattern_masks(3)
        assert masks.shape == (8, 3)
        np.testing.assert_array_equal(masks[5], [True, False, True])

    def test_zero_design_gives_prior(self, gaussian_prior):
        instance = RegressionInstance(X=np.zeros((5, 2)), y=np.arange(5.0), noise_std=1.0)
        post = enumerate_exact_posterior(instance, gaussian_prior)
        np.testing.assert_allclose(post.atom_probabilities(), 1 - gaussian_prior.q, rtol=1e-12)
        np.testing.assert_allclose(post.means, 0.0, atol=1e-15)

    def test_weights_normalized(self, small_instance, gaussian_prior):
        post = enumerate_exact_posterior(small_instance, gaussian_prior)
        assert post.weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert post.weights.shape == (32,)

    def test_matches_quadrature(self, gaussian_prior):
        instance = random_instance(10, 2, seed=3)
        post = enumerate_exact_posterior(instance, gaussian_prior)
        np.testing.assert_allclose(post.weights, quadrature_pattern_weights(instance, gaussian_prior),
                                   rtol=1e-6, atol=1e-12)

    def test_full_support_is_ridge(self, small_instance):
        prior = SpikeSlabPrior(q=1 - 1e-12, slab=GaussianSlab(variance=2.0))
        post = enumerate_exact_posterior(small_instance, prior)
        X, y = small_instance.X, small_instance.y
        ridge = np.linalg.solve(X.T @ X + np.eye(5) / 2.0, X.T @ y)
        np.testing.assert_allclose(post.weights @ post.means, ridge, rtol=1e-8)

    def test_covariance_on_demand(self, small_instance, gaussian_prior):
        post = enumerate_exact_posterior(small_instance, gaussian_prior)
        full = post.patterns.shape[0] - 1
        np.testing.assert_allclose(np.diag(post.covariance(full)), post.variances[full], rtol=1e-12)

    def test_workers_give_same_result(self, gaussian_prior):
        instance = random_instance(20, 13, seed=5)
        serial = enumerate_exact_posterior(instance, gaussian_prior, workers=1)
        parallel = enumerate_exact_posterior(instance, gaussian_prior, workers=2)
        np.testing.assert_array_equal(serial.log_weights, parallel.log_weights)

    def test_permuting_columns_permutes_marginals(self, small_instance, gaussian_prior):
        perm = np.array([3, 0, 4, 2, 1])
        permuted = RegressionInstance(X=small_instance.X[:, perm], y=small_instance.y, noise_std=1.0)
        post = enumerate_exact_posterior(small_instance, gaussian_prior)
        post_perm = enumerate_exact_posterior(permuted, gaussian_prior)
        index = {tuple(m): k for k, m in enumerate(post.patterns)}
        for k, mask in enumerate(post_perm.patterns):
            original = np.zeros(5, dtype=bool)
            original[perm] = mask
            expected = post.weights[index[tuple(original)]]
            assert post_perm.weights[k] == pytest.approx(expected, rel=1e-9, abs=1e-12)
        np.testing.assert_allclose(post_perm.atom_probabilities(), post.atom_probabilities()[perm],
                                   rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(post_perm.weights @ post_perm.means, (post.weights @ post.means)[perm],
                                   rtol=1e-9, atol=1e-12)

    def test_preconditions(self, small_instance, laplace_prior, gaussian_prior):
        with pytest.raises(PreconditionError):
            enumerate_exact_posterior(small_instance, laplace_prior)
        wide = random_instance(30, MAX_EXACT_DIM + 1, seed=0)
        with pytest.raises(PreconditionError):
            enumerate_exact_posterior(wide, gaussian_prior)


class TestMarginals:

    def test_cdf_limits(self, posterior):
        atom, cdf = exact_marginal_query(posterior, 1, np.array([-1e9, 1e9]))
        assert cdf[0] == pytest.approx(0.0, abs=1e-15)
        assert cdf[1] == pytest.approx(1.0, abs=1e-12)
        assert 0 < atom < 1

    def test_cdf_jumps_by_atom(self, posterior):
        atom, cdf = exact_marginal_query(posterior, 2, np.array([-1e-12, 0.0]))
        assert cdf[1] - cdf[0] == pytest.approx(atom, abs=1e-9)

    def test_scalar_query(self, posterior):
        _, value = exact_marginal_query(posterior, 0, 0.5)
        assert isinstance(value, float)

    def test_density_mass(self, posterior):
        atom, _ = exact_marginal_query(posterior, 0, 0.0)
        mass = integrate.quad(lambda t: float(exact_marginal_density(posterior, 0, t)), -30, 30,
                              points=[0.0], limit=200)[0]
        assert mass == pytest.approx(1 - atom, abs=1e-8)

    def test_symmetric_without_signal(self, gaussian_prior):
        instance = RegressionInstance(X=np.random.default_rng(1).normal(size=(8, 3)), y=np.zeros(8),
                                      noise_std=1.0)
        post = enumerate_exact_posterior(instance, gaussian_prior)
        t = np.array([0.3, 1.0, 2.5])
        _, upper = exact_marginal_query(post, 0, t)
        _, lower = exact_marginal_query(post, 0, -t)
        np.testing.assert_allclose(lower, 1 - upper, atol=1e-12)

    def test_coordinate_out_of_range(self, posterior):
        with pytest.raises(IndexError):
            exact_marginal_query(posterior, 5, 0.0)

    def test_exact_draws(self, posterior):
        draws = sample_exact(posterior, 40_000, seed=0)
        atoms = posterior.atom_probabilities()
        np.testing.assert_allclose(np.mean(draws == 0, axis=0), atoms, atol=0.015)
        np.testing.assert_allclose(draws.mean(axis=0), posterior.weights @ posterior.means, atol=0.02)
        assert wasserstein_to_exact(posterior, draws, 0) < 0.02


class TestQuadrature:

    @pytest.mark.parametrize('slab', [GaussianSlab(variance=2.0), LaplaceSlab(), GenericSlab.named('logistic')])
    def test_single_coordinate_matches_transform(self, slab):
        instance = random_instance(12, 1, seed=4, scale=0.5)
        prior = SpikeSlabPrior(q=0.3, slab=slab)
        x = instance.X[:, 0]
        lam = float(x @ x)
        h = float(x @ instance.y)
        expected = float(potential_terms(prior, lam, np.array([h])).p[0])
        weights = quadrature_pattern_weights(instance, prior)
        assert weights[1] == pytest.approx(expected, rel=1e-6)

    def test_dimension_cap(self, small_instance, gaussian_prior):
        with pytest.raises(PreconditionError):
            quadrature_pattern_weights(small_instance, gaussian_prior)


class TestConsistency:

    @pytest.mark.parametrize('seed', range(10))
    @pytest.mark.parametrize('prior', [SpikeSlabPrior(q=0.5, slab=GaussianSlab()),
                                       SpikeSlabPrior(q=0.3, slab=LaplaceSlab())])
    def test_marginalized_joint_matches_posterior(self, prior, seed):
        instance = random_instance(10, 1, seed=seed, scale=0.3)
        decomp = decompose(instance)
        assert decomposition_consistency_check(decomp, prior, instance) < 1e-6

    @pytest.mark.parametrize('prior', [SpikeSlabPrior(q=0.5, slab=GaussianSlab()),
                                       SpikeSlabPrior(q=0.3, slab=LaplaceSlab())])
    def test_error_shrinks_with_more_nodes(self, prior):
        instance = random_instance(10, 1, seed=2, scale=0.3)
        decomp = decompose(instance)
        errors = [decomposition_consistency_check(decomp, prior, instance, n_nodes=n) for n in (8, 16, 32)]
        assert errors[1] <= errors[0] / 2
        assert errors[2] <= max(errors[1] / 2, 1e-9)

    def test_larger_shift(self, gaussian_prior):
        instance = random_instance(10, 1, seed=2, scale=0.3)
        decomp = decompose(instance, gamma=decompose(instance).lambda_max + 5.0)
        assert decomposition_consistency_check(decomp, gaussian_prior, instance) < 1e-6

    def test_needs_one_coordinate(self, small_instance, gaussian_prior):
        with pytest.raises(PreconditionError):
            decomposition_consistency_check(decompose(small_instance), gaussian_prior, small_instance)


@pytest.mark.slow
class TestTwoStageAgainstExact:

    def test_toy_marginals(self, toy_instance, toy_model):
        post = enumerate_exact_posterior(toy_instance, toy_model.prior)
        config = ChainConfig(method=MalaMethod(tau=0.2), burn_in=10_000, seed=1)
        samples = two_stage_sample(decompose(toy_instance), toy_model.prior, config, 40_000)
        atoms = post.atom_probabilities()
        for i in range(toy_instance.d):
            assert np.mean(samples.thetas[:, i] == 0) == pytest.approx(atoms[i], abs=0.02)
            assert wasserstein_to_exact(post, samples.thetas, i) <= 0.02
