import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import integrate, stats

from spikeslab.prior import (CorrelatedGaussian, GaussianSlab, GenericSlab, IidGaussian, IidGeneric,
                             LaplaceSlab, LinearModel, RegressionInstance, SpikeSlabPrior,
                             generate_design, generate_response, sample_prior, simulate_instance)
from spikeslab.utils import ShapeError


class TestSlabs:
    def test_gaussian_rejects_nonpositive_variance(self):
        with pytest.raises(ValidationError):
            GaussianSlab(variance=0.0)

    def test_laplace_second_moment(self):
        slab = LaplaceSlab(rate=math.sqrt(2.0))
        assert slab.second_moment() == pytest.approx(1.0)
        value, _ = integrate.quad(lambda t: t * t * math.exp(float(slab.log_pdf(t))), -np.inf, np.inf)
        assert value == pytest.approx(1.0, rel=1e-8)

    def test_named_logistic_is_normalized(self):
        slab = GenericSlab.named('logistic')
        mass, _ = integrate.quad(lambda t: math.exp(slab.log_pdf_at(t)), -np.inf, np.inf)
        assert mass == pytest.approx(1.0, abs=1e-8)
        assert slab.second_moment() == pytest.approx(math.pi**2 / 3, rel=1e-6)

    def test_generic_from_unnormalized_callable(self):
        slab = GenericSlab(log_density=lambda t: -0.5 * np.asarray(t) ** 2 + 3.0,
                           tail_order=1, c1=0.1, c2=0.5)
        np.testing.assert_allclose(slab.log_pdf(np.array([0.0, 1.0])),
                                   GaussianSlab().log_pdf(np.array([0.0, 1.0])), atol=1e-8)

    def test_generic_rejects_non_concave(self):
        with pytest.raises(ValidationError, match='concave'):
            GenericSlab(log_density=np.cos)

    def test_generic_rejects_asymmetric(self):
        with pytest.raises(ValidationError, match='symmetric'):
            GenericSlab(log_density=lambda t: -(np.asarray(t) - 1.0) ** 2)

    def test_generic_rejects_bad_tail_constants(self):
        with pytest.raises(ValidationError, match='tail'):
            GenericSlab(name='normal', tail_order=1, c1=1.0, c2=0.5)

    def test_generic_rejects_unknown_name(self):
        with pytest.raises(ValidationError):
            GenericSlab(name='cauchy')

    def test_generic_sample_variance(self, rng):
        draws = GenericSlab.named('logistic').sample(rng, 100_000)
        assert abs(np.mean(draws)) < 0.03
        assert np.var(draws) == pytest.approx(math.pi**2 / 3, abs=0.1)


class TestSamplePrior:
    def test_gaussian_zero_fraction_and_slab_variance(self):
        prior = SpikeSlabPrior(q=0.2, slab=GaussianSlab())
        theta = sample_prior(prior, 100_000, seed=1)
        zeros = np.mean(theta == 0.0)
        assert abs(zeros - 0.8) < 0.005
        assert np.var(theta[theta != 0.0]) == pytest.approx(1.0, abs=0.02)

    def test_laplace_second_moment_of_nonzeros(self):
        prior = SpikeSlabPrior(q=0.7, slab=LaplaceSlab(rate=math.sqrt(2.0)))
        theta = sample_prior(prior, 100_000, seed=2)
        assert np.mean(theta[theta != 0.0] ** 2) == pytest.approx(1.0, abs=0.02)

    @pytest.mark.parametrize('prior', [SpikeSlabPrior(q=0.5, slab=GaussianSlab(variance=2.0)),
                                       SpikeSlabPrior(q=0.4, slab=LaplaceSlab(rate=1.5))])
    def test_nonzero_entries_follow_slab_cdf(self, prior):
        theta = sample_prior(prior, 100_000, seed=4)
        nonzero = theta[theta != 0.0]
        statistic = stats.kstest(nonzero, prior.slab.distribution.cdf).statistic
        assert statistic < 1.63 / math.sqrt(nonzero.size)

    def test_deterministic(self, gaussian_prior):
        np.testing.assert_array_equal(sample_prior(gaussian_prior, 50, 3), sample_prior(gaussian_prior, 50, 3))

    @pytest.mark.parametrize('q', [0.0, 1.0, -0.1])
    def test_q_must_be_open_interval(self, q):
        with pytest.raises(ValidationError):
            SpikeSlabPrior(q=q, slab=GaussianSlab())


class TestDesign:
    def test_isotropic_rows(self):
        X = generate_design(CorrelatedGaussian(rho=0.0), 10_000, 5, seed=0)
        assert np.max(np.abs(np.cov(X, rowvar=False) - np.eye(5))) < 0.05

    def test_ar1_covariance(self):
        X = generate_design(CorrelatedGaussian(rho=0.6), 10_000, 5, seed=0)
        assert np.cov(X, rowvar=False)[0, 1] == pytest.approx(0.6, abs=0.05)

    def test_ar1_covariance_matrix(self):
        np.testing.assert_allclose(CorrelatedGaussian(rho=0.5).covariance(3),
                                   [[1, 0.5, 0.25], [0.5, 1, 0.5], [0.25, 0.5, 1]])

    def test_rho_one_rejected(self):
        with pytest.raises(ValidationError):
            CorrelatedGaussian(rho=1.0)

    def test_small_variance_operator_norm(self):
        norms = [np.linalg.norm(generate_design(IidGaussian(variance=1 / 40), 20, 10, seed=s), 2) ** 2
                 for s in range(100)]
        assert max(norms) < 3.0

    def test_rademacher_entries(self):
        X = generate_design(IidGeneric(sampler='rademacher', variance=4.0), 50, 4, seed=0)
        assert set(np.unique(X)) <= {-2.0, 2.0}

    def test_rows_do_not_depend_on_n(self):
        a = generate_design(IidGaussian(), 5, 3, seed=9)
        b = generate_design(IidGaussian(), 8, 3, seed=9)
        np.testing.assert_array_equal(a, b[:5])


class TestResponse:
    def test_noiseless_limit(self, rng):
        X = rng.standard_normal((10, 3))
        theta = np.array([1.0, -2.0, 0.0])
        np.testing.assert_allclose(generate_response(X, theta, 1e-12, seed=0), X @ theta, atol=1e-9)

    def test_pure_noise_variance(self):
        X = np.ones((100_000, 1))
        y = generate_response(X, np.zeros(1), 2.0, seed=0)
        assert np.var(y) == pytest.approx(4.0, abs=0.1)

    def test_deterministic(self, rng):
        X = rng.standard_normal((10, 3))
        theta = np.ones(3)
        np.testing.assert_array_equal(generate_response(X, theta, 1.0, 5), generate_response(X, theta, 1.0, 5))

    def test_shape_mismatch(self, rng):
        with pytest.raises(ShapeError):
            generate_response(rng.standard_normal((10, 3)), np.ones(4), 1.0, 0)


class TestInstance:
    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            RegressionInstance(X=[[1.0, np.nan]], y=[0.0], noise_std=1.0)

    def test_rejects_bad_y_shape(self):
        with pytest.raises(ValidationError):
            RegressionInstance(X=np.ones((3, 2)), y=np.ones(2), noise_std=1.0)

    def test_arrays_are_read_only(self):
        instance = RegressionInstance(X=np.ones((3, 2)), y=np.ones(3), noise_std=1.0)
        with pytest.raises(ValueError):
            instance.X[0, 0] = 2.0

    def test_simulate_instance(self, toy_model):
        theta, instance = simulate_instance(toy_model, 11)
        assert theta.shape == (10,)
        assert (instance.n, instance.d) == (20, 10)
        theta2, instance2 = simulate_instance(toy_model, 11)
        np.testing.assert_array_equal(instance.y, instance2.y)
        np.testing.assert_array_equal(theta, theta2)

    def test_model_round_trips_through_json(self, toy_model):
        assert LinearModel.model_validate_json(toy_model.model_dump_json()) == toy_model
