"""Coefficient conditional: dense and Woodbury solvers."""

import logging

import numpy as np
import pytest

from app.data.models import EncodedData
from app.exceptions import ConditioningError, SMWInapplicableError, UsageError
from app.sampling.coefficients import (
    DirectSolver,
    WoodburySolver,
    assemble_precision,
    beta_conditional,
    conditional_mean,
    draw_beta,
    likelihood_rhs,
    make_solver,
    smw_apply,
)
from app.sampling.models import Representation, SolverKind
from app.sampling.rng import RngStream


def random_instance(gen, n, p, zero_prior=False):
    data = EncodedData(gen.normal(size=(n, p)), gen.integers(1, 6, size=n).astype(float))
    lam = gen.uniform(0.2, 5.0, size=n)
    prior_diag = gen.uniform(0.1, 3.0, size=p)
    if zero_prior:
        prior_diag[0] = 0.0
    return data, lam, prior_diag


class TestWoodburyEquivalence:
    def test_apply_and_draw_agree_with_direct(self):
        gen = np.random.default_rng(8)
        for trial in range(100):
            data, lam, prior_diag = random_instance(gen, n=10, p=50)
            rhs = gen.normal(size=50)
            direct = DirectSolver.from_latents(data, lam, prior_diag)
            woodbury = WoodburySolver(data, lam, prior_diag)
            np.testing.assert_allclose(woodbury.apply(rhs), direct.apply(rhs), rtol=1e-8, atol=1e-10)
            np.testing.assert_allclose(
                woodbury.perturbation(RngStream(trial)),
                direct.perturbation(RngStream(trial)),
                rtol=1e-8,
                atol=1e-10,
            )

    def test_smw_apply(self):
        gen = np.random.default_rng(2)
        data, lam, prior_diag = random_instance(gen, n=4, p=12)
        rhs = gen.normal(size=12)
        expected = np.linalg.solve(assemble_precision(data, lam, prior_diag), rhs)
        np.testing.assert_allclose(smw_apply(data, lam, prior_diag, rhs), expected, rtol=1e-9)

    def test_needs_positive_prior(self):
        gen = np.random.default_rng(3)
        data, lam, prior_diag = random_instance(gen, n=4, p=12, zero_prior=True)
        with pytest.raises(SMWInapplicableError):
            WoodburySolver(data, lam, prior_diag)

    def test_no_rows(self):
        prior_diag = np.array([2.0, 4.0])
        solver = WoodburySolver(EncodedData.empty(2), np.zeros(0), prior_diag)
        np.testing.assert_allclose(solver.apply(np.ones(2)), [0.5, 0.25])


class TestSolverSelection:
    def test_auto_uses_woodbury_when_wide(self):
        data, lam, prior_diag = random_instance(np.random.default_rng(4), n=5, p=30)
        assert isinstance(make_solver(data, lam, prior_diag), WoodburySolver)

    def test_auto_uses_direct_when_tall(self):
        data, lam, prior_diag = random_instance(np.random.default_rng(4), n=40, p=5)
        assert isinstance(make_solver(data, lam, prior_diag), DirectSolver)

    def test_requested_woodbury_falls_back(self, caplog):
        data, lam, prior_diag = random_instance(np.random.default_rng(5), n=5, p=30, zero_prior=True)
        with caplog.at_level(logging.WARNING):
            solver = make_solver(data, lam, prior_diag, SolverKind.smw)
        assert isinstance(solver, DirectSolver)
        assert "direct solver" in caplog.text


class TestFactorization:
    def test_jitter_rescues_singular_precision(self, caplog):
        with caplog.at_level(logging.WARNING):
            solver = DirectSolver(np.array([[1.0, 1.0], [1.0, 1.0]]))
        assert "jitter" in caplog.text
        assert np.all(np.isfinite(solver.factor))

    def test_indefinite_precision(self):
        with pytest.raises(ConditioningError):
            DirectSolver(np.array([[2.0, 0.0], [0.0, -1.0]]))


class TestConditional:
    def test_pdf_rhs_is_half_multiplicity(self):
        data = EncodedData(np.array([[1.0, 2.0], [-1.0, 0.5]]), np.array([1.0, 3.0]))
        rhs = likelihood_rhs(data, np.ones(2), None, Representation.pdf())
        np.testing.assert_allclose(rhs, data.yX.T @ np.array([0.5, 1.5]))

    def test_cdf_needs_z(self):
        data = EncodedData(np.eye(2), np.ones(2))
        with pytest.raises(UsageError):
            likelihood_rhs(data, np.ones(2), None, Representation.cdf())

    def test_draws_have_conditional_moments(self):
        gen = np.random.default_rng(6)
        data, lam, prior_diag = random_instance(gen, n=15, p=3)
        z = gen.uniform(0.1, 2.0, size=15)
        rep = Representation.cdf()
        conditional = beta_conditional(data, lam, z, rep, prior_diag)
        solver = DirectSolver.from_latents(data, lam, prior_diag)
        mean = conditional_mean(data, lam, z, rep, solver)
        np.testing.assert_allclose(mean, conditional.mean)

        rng = RngStream(12)
        draws = np.array([draw_beta(mean, solver, rng) for _ in range(20000)])
        covariance = np.linalg.inv(conditional.precision)
        se = np.sqrt(np.diag(covariance) / draws.shape[0])
        assert np.all(np.abs(draws.mean(axis=0) - mean) < 4.0 * se)
        np.testing.assert_allclose(np.cov(draws.T), covariance, rtol=0.06, atol=0.02 * np.abs(covariance).max())
