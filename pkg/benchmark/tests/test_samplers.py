import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import integrate, stats

from spikeslab.oracle import enumerate_exact_posterior, exact_marginal_query
from spikeslab.potential import FieldTarget, QuadraticTarget, decompose, potential_terms
from spikeslab.prior import (CorrelatedGaussian, GaussianSlab, GenericSlab, LaplaceSlab, LinearModel,
                             RegressionInstance, SpikeSlabPrior, simulate_instance)
from spikeslab.samplers import (ChainConfig, HmcMethod, MalaMethod, RejectionPolicy, find_mode, leapfrog,
                                run_chains, run_hmc, run_mala, sample_theta_given_phi, sample_tilted_slab,
                                two_stage_sample)
from spikeslab.utils import ConvergenceError


def zero_design_decomposition(d: int, gamma: float):
    instance = RegressionInstance(X=np.zeros((1, d)), y=np.zeros(1), noise_std=1.0)
    return decompose(instance, gamma=gamma)


def small_design_instance(d: int, seed: int) -> RegressionInstance:
    rng = np.random.default_rng(seed)
    X = rng.normal(0.0, 0.5, (20, d))
    theta = np.zeros(d)
    theta[0] = 1.5
    return RegressionInstance(X=X, y=X @ theta + rng.standard_normal(20), noise_std=1.0)


def tilted_slab_cdf(slab, gamma: float, x: float, half_width: float = 15.0, nodes: int = 1501):
    """CDF of the density prop. to exp(x t - gamma t^2 / 2) slab(t), tabulated piecewise by quad."""
    grid = np.linspace(-half_width, half_width, nodes)
    f = lambda t: math.exp(x * t - 0.5 * gamma * t * t + float(slab.log_pdf(t)))
    pieces = [integrate.quad(f, a, b)[0] for a, b in zip(grid[:-1], grid[1:])]
    table = np.concatenate([[0.0], np.cumsum(pieces)])
    return lambda t: np.interp(t, grid, table / table[-1])


def marginal_tv(post, draws: np.ndarray, i: int, edges: np.ndarray) -> float:
    """TV distance between the draws and the exact marginal of coordinate i.

    Cells are the atom at 0 and the intervals (edges[j-1], edges[j]] with the
    two unbounded tails; 0 must be one of the edges.
    """
    atom, cdf = exact_marginal_query(post, i, edges)
    exact = np.diff(np.concatenate([[0.0], cdf, [1.0]]))
    exact[np.searchsorted(edges, 0.0)] -= atom
    exact = np.append(exact, atom)
    column = draws[:, i]
    cells = np.searchsorted(edges, column[column != 0], side='left')
    empirical = np.append(np.bincount(cells, minlength=edges.size + 1), np.sum(column == 0)) / column.size
    return 0.5 * float(np.sum(np.abs(empirical - exact)))


@pytest.fixture(scope='module')
def toy_decomposition(toy_instance):
    return decompose(toy_instance)


@pytest.fixture(scope='module')
def two_coordinate_run():
    """Exact posterior and 10^5 two-stage draws of a d = 2 instance."""
    instance = small_design_instance(2, seed=11)
    prior = SpikeSlabPrior(q=0.5, slab=GaussianSlab())
    config = ChainConfig(method=MalaMethod(tau=0.05), burn_in=2000, seed=5)
    samples = two_stage_sample(decompose(instance), prior, config, 100_000)
    return instance, prior, enumerate_exact_posterior(instance, prior), samples


class TestConfig:

    def test_ell_must_be_positive(self):
        with pytest.raises(ValidationError):
            HmcMethod(ell=0)

    def test_tau_must_be_positive(self):
        with pytest.raises(ValidationError):
            MalaMethod(tau=0.0)

    def test_mass_must_be_positive_definite(self):
        with pytest.raises(ValidationError):
            HmcMethod(mass=[[1.0, 2.0], [2.0, 1.0]])

    def test_defaults(self):
        config = ChainConfig()
        assert config.method.kind == 'mala'
        assert config.rejection_policy is RejectionPolicy.STAY
        assert config.thinning == 1
        assert config.init_smoothness == 10.0

    def test_unknown_field_rejected(self):
        with pytest.raises(ValidationError):
            ChainConfig(step=0.1)


class TestQuadraticTarget:

    def test_mala_recovers_standard_gaussian(self):
        config = ChainConfig(method=MalaMethod(tau=0.5), total_steps=100_000, seed=1)
        states = run_mala(QuadraticTarget(5), config).states[1000:]
        np.testing.assert_allclose(states.mean(axis=0), 0.0, atol=0.03)
        np.testing.assert_allclose(states.var(axis=0), 1.0, atol=0.05)

    def test_hmc_recovers_standard_gaussian(self):
        config = ChainConfig(method=HmcMethod(epsilon=0.4, ell=10), total_steps=20_000, seed=2)
        result = run_hmc(QuadraticTarget(5), config)
        states = result.states[500:]
        np.testing.assert_allclose(states.mean(axis=0), 0.0, atol=0.05)
        np.testing.assert_allclose(states.var(axis=0), 1.0, atol=0.06)
        assert result.acceptance_rate > 0.9

    def test_vanishing_step_accepts(self):
        config = ChainConfig(method=MalaMethod(tau=1e-8), total_steps=1000, seed=3)
        assert run_mala(QuadraticTarget(3), config).acceptance_rate > 0.999

    def test_leapfrog_energy_drift(self, rng):
        target = QuadraticTarget(3)
        phi, rho = rng.standard_normal(3), rng.standard_normal(3)
        before = target.energy_and_grad(phi)[0] + 0.5 * rho @ rho
        phi1, rho1, H1, _ = leapfrog(target, phi, rho, 1e-3, 1000)
        assert abs(H1 + 0.5 * rho1 @ rho1 - before) < 1e-4

    def test_leapfrog_follows_harmonic_flow(self, rng):
        phi, rho = rng.standard_normal(2), rng.standard_normal(2)
        phi1, rho1, _, _ = leapfrog(QuadraticTarget(2), phi, rho, 1e-3, 1000)
        np.testing.assert_allclose(phi1, phi * math.cos(1.0) + rho * math.sin(1.0), atol=1e-5)
        np.testing.assert_allclose(rho1, rho * math.cos(1.0) - phi * math.sin(1.0), atol=1e-5)

    def test_wrong_method(self):
        with pytest.raises(ValueError):
            run_mala(QuadraticTarget(2), ChainConfig(method=HmcMethod(), total_steps=10))
        with pytest.raises(ValueError):
            run_hmc(QuadraticTarget(2), ChainConfig(total_steps=10))

    def test_total_steps_required(self):
        with pytest.raises(ValueError):
            run_mala(QuadraticTarget(2), ChainConfig())

    def test_chain_is_reproducible(self):
        config = ChainConfig(total_steps=200, seed=5)
        a = run_mala(QuadraticTarget(3), config)
        b = run_mala(QuadraticTarget(3), config)
        np.testing.assert_array_equal(a.states, b.states)
        assert a.proposals == 200

    def test_retry_policy_keeps_every_step_accepted(self):
        config = ChainConfig(method=MalaMethod(tau=1.5), total_steps=300, seed=4,
                             rejection_policy=RejectionPolicy.RETRY)
        result = run_mala(QuadraticTarget(3), config)
        assert np.all(np.any(np.diff(result.states, axis=0) != 0, axis=1))
        assert result.proposals >= 300


class TestFindMode:

    def test_zero_field_at_zero_tilt(self, toy_instance, toy_model):
        instance = RegressionInstance(X=toy_instance.X, y=np.zeros(toy_instance.n), noise_std=1.0)
        mode = find_mode(FieldTarget(decompose(instance), toy_model.prior))
        assert mode.converged
        np.testing.assert_array_equal(mode.phi, 0.0)

    def test_one_dimensional_closed_form(self):
        X = np.array([[0.3], [-0.4], [0.5]])
        instance = RegressionInstance(X=X, y=np.array([1.0, -2.0, 0.5]), noise_std=1.0)
        prior = SpikeSlabPrior(q=1 - 1e-12, slab=GaussianSlab(variance=1.0))
        decomp = decompose(instance)
        A = decomp.A[0, 0]
        a = decomp.gamma + 1.0
        h = decomp.h[0]
        mode = find_mode(FieldTarget(decomp, prior), learning_rate=0.05)
        assert mode.converged
        assert mode.phi[0] == pytest.approx(h * A / (a - A), abs=1e-6)

    def test_toy_instance_gradient(self, toy_instance, toy_model):
        mode = find_mode(FieldTarget(decompose(toy_instance), toy_model.prior))
        assert mode.converged
        assert mode.grad_norm < 1e-8


class TestConditional:

    def test_spike_probability_at_origin(self):
        prior = SpikeSlabPrior(q=0.5, slab=GaussianSlab())
        decomp = zero_design_decomposition(1000, 3.0)
        rng = np.random.default_rng(0)
        zeros = np.mean([np.mean(sample_theta_given_phi(decomp, prior, np.zeros(1000), rng) == 0)
                         for _ in range(20)])
        assert zeros == pytest.approx(2 / 3, abs=0.015)

    def test_large_field_concentrates(self):
        prior = SpikeSlabPrior(q=0.5, slab=GaussianSlab())
        decomp = zero_design_decomposition(1000, 3.0)
        theta = sample_theta_given_phi(decomp, prior, np.full(1000, 50.0), 1)
        assert np.all(theta != 0)
        assert theta.mean() == pytest.approx(12.5, abs=0.05)

    def test_laplace_tilted_moments(self):
        slab = LaplaceSlab(rate=math.sqrt(2.0))
        gamma, x = 2.0, 0.7

        def weight(t):
            return math.exp(x * t - 0.5 * gamma * t * t - slab.rate * abs(t))

        mass = integrate.quad(weight, -20, 20, points=[0.0])[0]
        mean = integrate.quad(lambda t: t * weight(t), -20, 20, points=[0.0])[0] / mass
        second = integrate.quad(lambda t: t * t * weight(t), -20, 20, points=[0.0])[0] / mass
        draws = sample_tilted_slab(slab, gamma, np.full(200_000, x), np.random.default_rng(1))
        assert draws.mean() == pytest.approx(mean, abs=0.01)
        assert draws.var() == pytest.approx(second - mean**2, abs=0.01)

    def test_laplace_far_tail_is_finite(self):
        draws = sample_tilted_slab(LaplaceSlab(), 2.0, np.array([-80.0, 80.0]), np.random.default_rng(2))
        assert np.all(np.isfinite(draws))
        assert draws[0] < 0 < draws[1]

    def test_generic_tilted_mean(self):
        slab = GenericSlab.named('logistic')
        gamma, x = 1.5, -0.8

        def weight(t):
            return math.exp(x * t - 0.5 * gamma * t * t + slab.log_pdf_at(t))

        mass = integrate.quad(weight, -20, 20)[0]
        mean = integrate.quad(lambda t: t * weight(t), -20, 20)[0] / mass
        draws = sample_tilted_slab(slab, gamma, np.full(20_000, x), np.random.default_rng(3))
        assert draws.mean() == pytest.approx(mean, abs=0.02)

    @pytest.mark.parametrize('slab, gamma, x', [
        (GaussianSlab(variance=2.0), 3.0, 1.3),
        (LaplaceSlab(rate=math.sqrt(2.0)), 2.0, 0.7),
        (LaplaceSlab(rate=1.0), 4.0, -2.5),
    ])
    def test_conditional_draws_match_quadrature_cdf(self, slab, gamma, x):
        d = 20_000
        prior = SpikeSlabPrior(q=0.5, slab=slab)
        theta = sample_theta_given_phi(zero_design_decomposition(d, gamma), prior, np.full(d, x), 9)
        p = float(potential_terms(prior, gamma, x).p)
        assert np.mean(theta == 0) == pytest.approx(1 - p, abs=4 * math.sqrt(p * (1 - p) / d))
        slab_draws = theta[theta != 0]
        statistic = stats.kstest(slab_draws, tilted_slab_cdf(slab, gamma, x)).statistic
        assert statistic < 1.63 / math.sqrt(slab_draws.size)


class TestTwoStage:

    def test_zero_samples(self, toy_decomposition, toy_model):
        samples = two_stage_sample(toy_decomposition, toy_model.prior, ChainConfig(burn_in=10), 0)
        assert samples.thetas.shape == (0, 10)
        assert samples.proposals == 0

    def test_shape_and_metadata(self, toy_decomposition, toy_model):
        config = ChainConfig(burn_in=100, thinning=3, seed=7, keep_phis=True)
        samples = two_stage_sample(toy_decomposition, toy_model.prior, config, 50)
        assert samples.thetas.shape == (50, 10)
        assert samples.phis.shape == (50, 10)
        assert samples.config.total_steps == 250
        assert samples.proposals == 250
        assert 0 <= samples.acceptance_rate <= 1
        assert samples.seed == 7
        assert samples.gamma == toy_decomposition.gamma

    def test_deterministic(self, toy_decomposition, toy_model):
        config = ChainConfig(burn_in=50, seed=11)
        a = two_stage_sample(toy_decomposition, toy_model.prior, config, 30)
        b = two_stage_sample(toy_decomposition, toy_model.prior, config, 30)
        np.testing.assert_array_equal(a.thetas, b.thetas)
        c = two_stage_sample(toy_decomposition, toy_model.prior, config.model_copy(update={'seed': 12}), 30)
        assert not np.array_equal(a.thetas, c.thetas)

    def test_draws_contain_exact_zeros(self, toy_decomposition, toy_model):
        samples = two_stage_sample(toy_decomposition, toy_model.prior, ChainConfig(burn_in=100), 500)
        zeros = np.mean(samples.thetas == 0)
        assert 0 < zeros < 1

    def test_retry_cap(self, toy_decomposition, toy_model):
        config = ChainConfig(method=MalaMethod(tau=1e4), burn_in=10, max_retries=1,
                             rejection_policy=RejectionPolicy.RETRY)
        with pytest.raises(ConvergenceError):
            two_stage_sample(toy_decomposition, toy_model.prior, config, 10)

    def test_mala_acceptance_window(self, toy_decomposition, toy_model):
        config = ChainConfig(method=MalaMethod(tau=0.2), burn_in=2000, seed=2024)
        samples = two_stage_sample(toy_decomposition, toy_model.prior, config, 3000)
        assert 0.2 <= samples.acceptance_rate <= 0.6

    def test_hmc_runs(self, toy_decomposition, toy_model):
        config = ChainConfig(method=HmcMethod(epsilon=0.1, ell=10), burn_in=100, seed=3)
        samples = two_stage_sample(toy_decomposition, toy_model.prior, config, 100)
        assert samples.thetas.shape == (100, 10)
        assert samples.acceptance_rate > 0.5

    def test_negative_sample_count(self, toy_decomposition, toy_model):
        with pytest.raises(ValueError):
            two_stage_sample(toy_decomposition, toy_model.prior, ChainConfig(), -1)

    def test_independent_chains(self, toy_decomposition, toy_model):
        config = ChainConfig(burn_in=20, seed=1)
        chains = run_chains(toy_decomposition, toy_model.prior, config, 10, 3)
        assert len({c.seed for c in chains}) == 3
        assert not np.array_equal(chains[0].thetas, chains[1].thetas)

    def test_csv_and_sidecar(self, toy_decomposition, toy_model, tmp_path):
        samples = two_stage_sample(toy_decomposition, toy_model.prior, ChainConfig(burn_in=20), 5)
        sidecar = samples.to_csv(tmp_path / 'draws.csv', extra={'note': 'x'})
        lines = (tmp_path / 'draws.csv').read_text().splitlines()
        assert lines[0].startswith('theta_1,')
        assert len(lines) == 6
        assert '"note"' in sidecar.read_text()

    def test_preset_chain_length_is_replaced(self, toy_decomposition, toy_model):
        config = ChainConfig(burn_in=40, thinning=2, total_steps=7)
        samples = two_stage_sample(toy_decomposition, toy_model.prior, config, 10)
        assert samples.config.total_steps == 60
        assert samples.proposals == 60


@pytest.mark.slow
class TestStationarity:

    @pytest.mark.parametrize('prior', [SpikeSlabPrior(q=0.5, slab=GaussianSlab()),
                                       SpikeSlabPrior(q=0.3, slab=LaplaceSlab())])
    def test_mala_matches_field_density(self, prior):
        target = FieldTarget(decompose(small_design_instance(1, seed=0)), prior)
        config = ChainConfig(method=MalaMethod(tau=0.05), total_steps=200_000, seed=8)
        states = run_mala(target, config).states[1000:, 0]
        edges = np.linspace(states.min(), states.max(), 41)
        counts, _ = np.histogram(states, edges)
        H_ref = target.energy_and_grad(np.array([np.median(states)]))[0]
        density = lambda t: math.exp(H_ref - target.energy_and_grad(np.array([t]))[0])
        masses = np.array([integrate.quad(density, a, b)[0] for a, b in zip(edges[:-1], edges[1:])])
        tv = 0.5 * np.sum(np.abs(counts / states.size - masses / masses.sum()))
        assert tv < 0.02

    def test_two_stage_matches_exact_marginals(self, two_coordinate_run):
        _, _, post, samples = two_coordinate_run
        edges = np.linspace(-4.0, 4.0, 33)
        for i in range(2):
            assert marginal_tv(post, samples.thetas, i, edges) < 0.03

    def test_invariant_under_burn_in_and_thinning(self, two_coordinate_run):
        instance, prior, _, samples = two_coordinate_run
        config = samples.config.model_copy(update={'burn_in': 4000, 'thinning': 2, 'seed': 6,
                                                   'total_steps': None})
        doubled = two_stage_sample(decompose(instance), prior, config, 100_000)
        np.testing.assert_allclose(np.mean(doubled.thetas == 0, axis=0), np.mean(samples.thetas == 0, axis=0),
                                   atol=0.01)

    def test_hmc_acceptance_window_on_weak_signal_setting(self):
        model = LinearModel(n=100, d=50, prior=SpikeSlabPrior(q=0.2, slab=GaussianSlab()),
                            design=CorrelatedGaussian(rho=0.0), noise_std=3.0 * math.sqrt(50))
        rates = []
        for seed in range(5):
            _, instance = simulate_instance(model, seed)
            config = ChainConfig(method=HmcMethod(epsilon=0.4, ell=10), total_steps=2000, seed=seed)
            rates.append(run_hmc(FieldTarget(decompose(instance), model.prior), config).acceptance_rate)
        assert 0.8 <= np.median(rates) <= 0.999
