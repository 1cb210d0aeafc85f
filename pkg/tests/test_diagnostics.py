import math

import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.special import expit

from app.data.encoding import encode_binary
from app.data.synthetic import quadrature_toy
from app.diagnostics.metrics import (
    autocorrelation,
    batch_means_se,
    diagnose_trace,
    effective_sample_size,
    ess_with_flag,
    expected_log_likelihood,
    interquartile_range,
    misclassification_rate,
    predict,
)
from app.diagnostics.oracles import irls_mle, quadrature_posterior
from app.exceptions import DomainError, UsageError
from app.sampling.models import NuMode, PriorSpec
from app.sampling.rng import RngStream
from app.utils.serialization import trace_from_samples


class TestEffectiveSampleSize:
    def test_iid_series(self):
        series = np.random.default_rng(0).normal(size=5000)
        assert effective_sample_size(series) == pytest.approx(5000, rel=0.15)

    def test_autoregressive_series(self):
        gen = np.random.default_rng(1)
        phi, S = 0.9, 40000
        series = np.empty(S)
        series[0] = gen.normal()
        for t in range(1, S):
            series[t] = phi * series[t - 1] + gen.normal()
        expected = S * (1 - phi) / (1 + phi)
        assert effective_sample_size(series) == pytest.approx(expected, rel=0.3)

    def test_never_exceeds_length(self):
        # alternating series has negative lag-one correlation
        series = np.tile([1.0, -1.0], 50) + np.random.default_rng(2).normal(scale=0.01, size=100)
        assert effective_sample_size(series) <= 100

    def test_constant_series(self):
        assert ess_with_flag(np.full(50, 3.0)) == (1.0, True)

    def test_too_short(self):
        with pytest.raises(DomainError):
            effective_sample_size(np.arange(9.0))

    def test_autocorrelation_starts_at_one(self):
        rho = autocorrelation(np.random.default_rng(3).normal(size=200))
        assert rho[0] == pytest.approx(1.0)
        assert rho.size == 200

    def test_trace_diagnostics(self):
        gen = np.random.default_rng(4)
        beta = np.column_stack([gen.normal(size=300), np.zeros(300)])
        diagnostics = diagnose_trace(trace_from_samples(beta, np.full(300, 2.0)))
        assert diagnostics.kept == 300
        np.testing.assert_array_equal(diagnostics.degenerate, [False, True])
        assert diagnostics.ess_nu == 1.0


class TestSpread:
    def test_normal_interquartile_range(self):
        samples = np.random.default_rng(5).normal(size=(20000, 2)) * [1.0, 2.0]
        np.testing.assert_allclose(interquartile_range(samples), [1.349, 2.698], rtol=0.03)

    def test_batch_se_of_iid_samples(self):
        samples = np.random.default_rng(6).normal(size=(8000, 1))
        # iid IQR of N(0, 1) has SE ½/(φ(0.674)√S)
        expected = 0.5 / (0.3178 * math.sqrt(8000))
        assert batch_means_se(samples)[0] == pytest.approx(expected, rel=0.5)

    def test_batch_se_grows_with_autocorrelation(self):
        gen = np.random.default_rng(7)
        noise = gen.normal(size=8000)
        series = np.empty(8000)
        series[0] = noise[0]
        for t in range(1, 8000):
            series[t] = 0.9 * series[t - 1] + math.sqrt(1 - 0.81) * noise[t]
        correlated = batch_means_se(series[:, None])[0]
        assert correlated > 2.0 * batch_means_se(noise[:, None])[0]

    def test_too_few_samples_per_batch(self):
        with pytest.raises(DomainError):
            batch_means_se(np.zeros((150, 1)))


class TestPredictiveMetrics:
    def test_expected_log_likelihood(self):
        assert expected_log_likelihood([0.5], [0.5]) == pytest.approx(math.log(0.5))
        assert expected_log_likelihood([1.0, 0.0], [0.8, 0.1]) == pytest.approx((math.log(0.8) + math.log(0.9)) / 2)

    def test_clamping_keeps_it_finite(self):
        assert np.isfinite(expected_log_likelihood([1.0, 0.0], [0.0, 1.0]))

    def test_misclassification(self):
        assert misclassification_rate([1, -1, 1, -1], [0.9, 0.2, 0.3, 0.7]) == 0.5
        assert misclassification_rate([1, 0], [0.6, 0.4]) == 0.0

    def test_tie_counts_as_positive(self):
        assert misclassification_rate([1, -1], [0.5, 0.5]) == 0.5
        assert misclassification_rate([-1], [0.5]) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(UsageError):
            misclassification_rate([1, -1], [0.5])

    def test_plug_in_prediction(self):
        X = np.array([[1.0, 0.0], [1.0, 2.0]])
        np.testing.assert_allclose(predict(np.array([0.5, -1.0]), X), expit([0.5, -1.5]))

    def test_trace_prediction_averages_probabilities(self):
        beta = np.array([[0.0, 1.0], [2.0, -1.0], [1.0, 1.0]])
        trace = trace_from_samples(beta, np.ones(3))
        X = np.array([[1.0, 1.0]])
        expected = np.mean(expit(beta @ X[0]))
        np.testing.assert_allclose(predict(trace, X), [expected])

    def test_prediction_dimension_mismatch(self):
        with pytest.raises(UsageError):
            predict(np.zeros(3), np.ones((2, 2)))


class TestOracles:
    def test_irls_solves_score_equation(self, small_binary):
        _, data, _ = small_binary
        beta = irls_mle(data)
        score = data.yX.T @ (data.kappa_vec * (1.0 - expit(data.eta(beta))))
        np.testing.assert_allclose(score, 0.0, atol=1e-8)

    def test_quadrature_matches_dense_grid(self, toy_one):
        _, data = toy_one
        prior = PriorSpec.build(1, intercept=False, nu_mode=NuMode.fixed, nu_fixed=1.0)
        result = quadrature_posterior(data, prior, nu=1.0)

        grid = np.linspace(-40.0, 40.0, 400001)
        log_density = -np.logaddexp(0.0, -np.outer(grid, data.yX[:, 0])).sum(axis=1) - np.abs(grid)
        density = np.exp(log_density - log_density.max())
        total = trapezoid(density, grid)
        mean = trapezoid(grid * density, grid) / total
        sd = math.sqrt(trapezoid(grid ** 2 * density, grid) / total - mean ** 2)
        assert result.mean[0] == pytest.approx(mean, rel=1e-5, abs=1e-7)
        assert result.sd[0] == pytest.approx(sd, rel=1e-5)

    def test_quadrature_dimension_limit(self, small_binary):
        _, data, _ = small_binary
        with pytest.raises(UsageError):
            quadrature_posterior(data, PriorSpec.build(data.p), nu=1.0)

    def test_quadrature_two_dimensions_runs(self):
        dataset, _ = quadrature_toy(RngStream(5), p=2)
        data = encode_binary(dataset)
        prior = PriorSpec.build(2, intercept=False, nu_mode=NuMode.fixed, nu_fixed=1.0)
        result = quadrature_posterior(data, prior, nu=1.0)
        assert result.mean.shape == (2,) and np.all(result.sd > 0)
