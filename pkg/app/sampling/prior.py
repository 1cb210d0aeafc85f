"""Regularization prior: mixing scales ω and the penalty parameter ν."""

import numpy as np

from app.sampling.distributions import sample_inverse_gamma, sample_inverse_gaussian
from app.sampling.models import PriorSpec
from app.sampling.rng import RngStream
from app.utils.constants import BETA_FLOOR


def draw_omega(beta, nu: float, kappa: float, sigma, rng: RngStream) -> np.ndarray:
    """Draws ωⱼ through ωⱼ⁻¹ ~ InverseGaussian(νσⱼ/(κ|βⱼ|), 1).

    |βⱼ| is floored at ``BETA_FLOOR`` so the mean stays finite. Only pass
    penalized coordinates.
    """
    magnitude = np.maximum(np.abs(np.asarray(beta, dtype=float)), BETA_FLOOR)
    mu = nu * np.asarray(sigma, dtype=float) / (kappa * magnitude)
    return 1.0 / np.atleast_1d(sample_inverse_gaussian(mu, 1.0, rng))


def update_omega(beta: np.ndarray, nu: float, kappa: float, prior: PriorSpec, rng: RngStream) -> np.ndarray:
    """Full ω vector: lasso draws on penalized coordinates, ones elsewhere."""
    omega = np.ones(prior.p)
    mask = prior.penalized
    if prior.alpha == 1 and mask.any():
        omega[mask] = draw_omega(beta[mask], nu, kappa, prior.sigma[mask], rng)
    return omega


def draw_nu(beta: np.ndarray, kappa: float, prior: PriorSpec, rng: RngStream) -> float:
    """ν ~ InverseGamma(r_κ + κp′, d_κ + κΣ|βⱼ/σⱼ|) over penalized coordinates."""
    mask = prior.penalized
    shape = prior.r_kappa(kappa) + kappa * prior.n_penalized
    scale = prior.d_kappa(kappa) + kappa * np.abs(beta[mask] / prior.sigma[mask]).sum()
    return float(sample_inverse_gamma(shape, scale, rng))


def draw_nu_sq(beta: np.ndarray, omega: np.ndarray, kappa: float, prior: PriorSpec, rng: RngStream) -> float:
    """Draws ν² ~ InverseGamma(r_κ + κp′/2, d_κ + ½κ^{2/α}Σβⱼ²/(σⱼ²ωⱼ)) and returns ν.

    With α = 1 the multiplier is κ²; the ridge (α = 2, ω ≡ 1) uses κ.
    """
    mask = prior.penalized
    shape = prior.r_kappa(kappa) + 0.5 * kappa * prior.n_penalized
    quadratic = (beta[mask] ** 2 / (prior.sigma[mask] ** 2 * omega[mask])).sum()
    scale = prior.d_kappa(kappa) + 0.5 * kappa ** (2.0 / prior.alpha) * quadratic
    return float(np.sqrt(sample_inverse_gamma(shape, scale, rng)))


def prior_precision(omega, nu: float, kappa: float, alpha: int, sigma) -> np.ndarray:
    """Diagonal prior precision κ^{2/α}/(ν²σⱼ²ωⱼ); exactly 0 where σⱼ is infinite."""
    sigma = np.asarray(sigma, dtype=float)
    omega = np.ones(sigma.shape) if alpha == 2 else np.asarray(omega, dtype=float)
    penalized = np.isfinite(sigma)
    precision = np.zeros(sigma.shape)
    precision[penalized] = kappa ** (2.0 / alpha) / (nu ** 2 * sigma[penalized] ** 2 * omega[penalized])
    return precision


def log_prior_penalty(beta: np.ndarray, nu: float, kappa: float, prior: PriorSpec) -> float:
    """Powered log prior of β given ν, up to a constant.

    Lasso: −κΣ|βⱼ/σⱼ|/ν. Ridge: −κΣ(βⱼ/σⱼ)²/(2ν²).
    """
    mask = prior.penalized
    scaled = beta[mask] / prior.sigma[mask]
    if prior.alpha == 1:
        return float(-kappa * np.abs(scaled).sum() / nu)
    return float(-kappa * (scaled ** 2).sum() / (2.0 * nu ** 2))
