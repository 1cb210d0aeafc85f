"""Random variates and densities behind the Gibbs updates."""

import math

import numpy as np
import pytest
from scipy import stats
from scipy.special import expit

from app.exceptions import DomainError, ImproperMixingError, UsageError
from app.sampling.distributions import (
    normal_logcdf,
    polya_mean,
    polya_tail_mean,
    sample_gig_half,
    sample_inverse_gamma,
    sample_inverse_gaussian,
    sample_polya,
    sample_truncated_normal_positive,
    z_cdf_at_zero,
    z_pdf,
)
from app.sampling.models import PolyaParams
from app.sampling.rng import RngStream


def assert_mean_close(samples, expected, se_multiple=4.0):
    samples = np.asarray(samples, dtype=float)
    se = samples.std(ddof=1) / math.sqrt(samples.size)
    assert abs(samples.mean() - expected) < se_multiple * se, (samples.mean(), expected, se)


class TestPolya:
    """Truncated Polya mixing law q_{a,b}."""

    def test_truncated_mean_matches_series(self, rng):
        draws = sample_polya(PolyaParams(1.0, 1.0, 100, tail_correction=False), rng, size=20000)
        assert draws.shape == (20000,)
        assert np.all(draws > 0)
        assert_mean_close(draws, polya_mean(1.0, 1.0, 100))

    def test_tail_correction_restores_full_mean(self, rng):
        # Σ_{k≥0} 2/(k+1)² = π²/3, which 100 terms alone miss by about 0.02
        draws = sample_polya(PolyaParams(1.0, 1.0, 100), rng, size=40000)
        assert polya_mean(1.0, 1.0, 100) + polya_tail_mean(1.0, 1.0, 100) == pytest.approx(math.pi ** 2 / 3)
        assert_mean_close(draws, math.pi ** 2 / 3)

    @pytest.mark.parametrize("a, b", [(1.0, 4.0), (0.5, 19.5), (2.0, 2.0), (3.0, 3.0 + 1e-9)])
    def test_tail_mean_matches_long_sum(self, a, b):
        long_sum = polya_mean(a, b, 200000) - polya_mean(a, b, 50)
        # the sum beyond 200000 terms is below 1e-5
        assert polya_tail_mean(a, b, 50) == pytest.approx(long_sum, abs=2e-5)

    def test_tail_mean_broadcasts(self):
        tail = polya_tail_mean(np.array([0.5, 1.0]), np.array([0.5, 20.0]), 10)
        assert tail.shape == (2,) and np.all(tail > 0)

    def test_per_row_shapes_broadcast(self, rng):
        a = np.array([0.5, 1.0, 2.0])
        b = np.array([0.5, 3.0, 1.0])
        draws = sample_polya(PolyaParams(a, b, 50), rng)
        assert draws.shape == (3,)

    def test_scalar_in_scalar_out(self, rng):
        assert isinstance(sample_polya(PolyaParams(1.0, 2.0, 10), rng), float)

    @pytest.mark.slow
    @pytest.mark.parametrize("a, b, expected", [(1.0, 1.0, math.pi ** 2 / 3), (0.5, 0.5, math.pi ** 2)])
    def test_mean_of_long_series(self, a, b, expected):
        draws = sample_polya(PolyaParams(a, b, 10000, tail_correction=False), RngStream(5), size=100000)
        # the dropped tail contributes at most 2/K to the mean
        tail = 2.0 / 10000
        se = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - expected) < 3.0 * se + tail

    def test_improper_shapes_rejected(self):
        with pytest.raises(ImproperMixingError):
            PolyaParams(0.0, 1.0)
        with pytest.raises(ImproperMixingError):
            PolyaParams(1.0, np.array([1.0, -0.5]))

    def test_truncation_must_be_positive(self):
        with pytest.raises(UsageError):
            PolyaParams(1.0, 1.0, 0)


class TestLogisticMixtureIdentity:
    """Averaging Φ((η + ½(1−κ)λ)/√λ) over λ ~ q_{1,κ} gives (1 + e^{−η})^{−κ}."""

    @staticmethod
    def check(eta, kappa, draws, K, rng):
        lam = sample_polya(PolyaParams(1.0, kappa, K), rng, size=draws)
        weights = np.exp(normal_logcdf((eta + 0.5 * (1.0 - kappa) * lam) / np.sqrt(lam)))
        target = expit(eta) ** kappa
        se = weights.std(ddof=1) / math.sqrt(draws)
        assert abs(weights.mean() - target) < 4.0 * se + 0.01 * target, (eta, kappa, weights.mean(), target)

    def test_logistic_at_one(self, rng):
        self.check(1.0, 1.0, 20000, 100, rng)

    @pytest.mark.slow
    @pytest.mark.parametrize("eta", [-2.0, -1.0, 0.0, 1.0, 2.0])
    @pytest.mark.parametrize("kappa", [1.0, 2.0, 5.0])
    def test_grid(self, eta, kappa):
        self.check(eta, kappa, 100000, 100, RngStream(17).child(int(10 * eta) + 50, int(kappa)))


class TestTruncatedNormal:
    @pytest.mark.parametrize("mean", [-3.0, -0.2, 1.5])
    def test_moments(self, rng, mean):
        draws = sample_truncated_normal_positive(np.full(100000, mean), 1.0, rng)
        reference = stats.truncnorm(-mean, np.inf, loc=mean)
        assert np.all(draws > 0)
        assert_mean_close(draws, reference.mean())
        assert draws.std() == pytest.approx(reference.std(), rel=0.03)

    def test_far_tail_stays_positive(self, rng):
        draws = sample_truncated_normal_positive(np.full(1000, -40.0), 0.25, rng)
        assert np.all(draws > 0)
        # mean of N⁺(−40, 0.25) is close to 0.25/40
        assert draws.mean() == pytest.approx(0.25 / 40.0, rel=0.1)

    def test_nonpositive_variance(self, rng):
        with pytest.raises(DomainError):
            sample_truncated_normal_positive(0.0, 0.0, rng)


class TestInverseGaussian:
    def test_moments(self, rng):
        mu, shape = 2.0, 3.0
        draws = sample_inverse_gaussian(mu, shape, rng, size=100000)
        assert_mean_close(draws, mu)
        assert draws.var() == pytest.approx(mu ** 3 / shape, rel=0.05)

    def test_huge_mean_is_stable(self, rng):
        draws = sample_inverse_gaussian(1e10, 1.0, rng, size=100000)
        assert np.all(np.isfinite(draws)) and np.all(draws > 0)
        # the reciprocal tends to Gamma(½, scale 2) whose mean is 1
        assert_mean_close(1.0 / draws, 1.0 + 1e-10)

    def test_invalid_parameters(self, rng):
        with pytest.raises(DomainError):
            sample_inverse_gaussian(-1.0, 1.0, rng)
        with pytest.raises(DomainError):
            sample_inverse_gaussian(1.0, 0.0, rng)


class TestGeneralizedInverseGaussian:
    @pytest.mark.parametrize("chi, psi", [(1.0, 1.0), (0.3, 4.0), (5.0, 0.5)])
    def test_matches_scipy(self, rng, chi, psi):
        draws = sample_gig_half(chi, psi, rng, size=100000)
        reference = stats.geninvgauss(0.5, math.sqrt(chi * psi), scale=math.sqrt(chi / psi))
        assert_mean_close(draws, reference.mean())
        assert draws.var() == pytest.approx(reference.var(), rel=0.06)


class TestInverseGamma:
    def test_mean(self, rng):
        draws = sample_inverse_gamma(4.0, 2.1, rng, size=100000)
        assert_mean_close(draws, 0.7)

    def test_invalid(self, rng):
        with pytest.raises(DomainError):
            sample_inverse_gamma(0.0, 1.0, rng)


class TestZDistribution:
    def test_logistic_density_at_zero(self):
        assert z_pdf(0.0, 1.0, 1.0) == pytest.approx(0.25)

    def test_density_integrates_to_one(self):
        z = np.linspace(-60, 60, 200001)
        assert np.trapezoid(z_pdf(z, 0.5, 2.5, 1.3, 0.7), z) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("kappa, mu", [(1.0, 0.0), (2.0, 1.3), (5.0, -2.0)])
    def test_cdf_at_zero(self, kappa, mu):
        assert z_cdf_at_zero(kappa, mu) == pytest.approx(1.0 - (1.0 + math.exp(-mu)) ** (-kappa))

    def test_invalid_shape(self):
        with pytest.raises(DomainError):
            z_pdf(0.0, 0.0, 1.0)
