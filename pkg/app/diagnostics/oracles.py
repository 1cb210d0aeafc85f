"""Deterministic reference answers the sampler is checked against.

``irls_mle`` solves the weighted logistic likelihood by Newton's method and
``quadrature_posterior`` integrates the power posterior of one or two
coefficients numerically.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, trapezoid
from scipy.linalg import cho_solve, cholesky
from scipy.special import expit

from app.data.models import EncodedData
from app.exceptions import NumericalError, UsageError
from app.sampling.models import PriorSpec


@dataclass
class QuadratureResult:
    """Posterior moments from numerical integration."""
    mean: np.ndarray
    sd: np.ndarray


def irls_mle(data: EncodedData, max_iter: int = 100, tol: float = 1e-12) -> np.ndarray:
    """Maximizes Σκ′ᵢ log σ(yᵢ′xᵢᵀβ) by iteratively reweighted least squares.

    Raises:
        NumericalError: If Newton's method does not converge.
    """
    beta = np.zeros(data.p)
    for iteration in range(max_iter):
        mu = expit(data.eta(beta))
        gradient = data.yX.T @ (data.kappa_vec * (1.0 - mu))
        hessian = (data.yX * (data.kappa_vec * mu * (1.0 - mu))[:, None]).T @ data.yX
        step = cho_solve((cholesky(hessian, lower=False), False), gradient)
        beta = beta + step
        if np.max(np.abs(step)) < tol * max(1.0, np.max(np.abs(beta))):
            logging.debug(f"IRLS converged after {iteration + 1} iterations")
            return beta
    raise NumericalError(f"IRLS did not converge in {max_iter} iterations")


def _log_posterior(points: np.ndarray, data: EncodedData, prior: PriorSpec, nu: float, kappa: float) -> np.ndarray:
    """Log power posterior at each row of ``points`` (G×p)."""
    scaled = data.with_kappa(kappa)
    eta = scaled.yX @ points.T
    loglik = -(scaled.kappa_vec[:, None] * np.logaddexp(0.0, -eta)).sum(axis=0)
    mask = prior.penalized
    standardized = points[:, mask] / prior.sigma[mask]
    if prior.alpha == 1:
        penalty = kappa * np.abs(standardized).sum(axis=1) / nu
    else:
        penalty = kappa * (standardized ** 2).sum(axis=1) / (2.0 * nu ** 2)
    return loglik - penalty


def _grid_moments(axes, data, prior, nu, kappa):
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.column_stack([m.ravel() for m in mesh])
    log_density = _log_posterior(points, data, prior, nu, kappa)
    density = np.exp(log_density - log_density.max()).reshape(mesh[0].shape)

    def integrate(values):
        for axis in reversed(axes):
            values = trapezoid(values, axis, axis=-1)
        return values

    total = integrate(density)
    means = np.array([integrate(density * m) / total for m in mesh])
    second = np.array([integrate(density * m ** 2) / total for m in mesh])
    return means, np.sqrt(np.maximum(second - means ** 2, 0.0))


def quadrature_posterior(
    data: EncodedData,
    prior: PriorSpec,
    nu: float,
    kappa: float = 1.0,
    points: int = 401,
    bound: float = 30.0,
) -> QuadratureResult:
    """Posterior mean and sd of β for p ∈ {1, 2} at fixed ν.

    A coarse grid on [−bound, bound]^p locates the mass; the refined pass
    integrates over ±12 sd around it (adaptive quadrature for p = 1, a dense
    trapezoid grid for p = 2).
    """
    p = data.p
    if p not in (1, 2):
        raise UsageError(f"Quadrature oracle supports one or two coefficients, got {p}")

    coarse = [np.linspace(-bound, bound, 1201 if p == 1 else 301)] * p
    centre, spread = _grid_moments(coarse, data, prior, nu, kappa)
    lower = centre - 12.0 * spread
    upper = centre + 12.0 * spread

    if p == 2:
        fine = [np.linspace(lo, hi, points) for lo, hi in zip(lower, upper)]
        return QuadratureResult(*_grid_moments(fine, data, prior, nu, kappa))

    peak = _log_posterior(centre[None, :], data, prior, nu, kappa)[0]

    def density(b, power):
        value = _log_posterior(np.array([[b]]), data, prior, nu, kappa)[0]
        return b ** power * np.exp(value - peak)

    kinks = [0.0] if lower[0] < 0.0 < upper[0] else None
    moments = [
        quad(density, lower[0], upper[0], args=(k,), points=kinks, limit=200, epsabs=1e-12, epsrel=1e-10)[0]
        for k in range(3)
    ]
    mean = moments[1] / moments[0]
    sd = np.sqrt(max(moments[2] / moments[0] - mean ** 2, 0.0))
    return QuadratureResult(np.array([mean]), np.array([sd]))
