"""Random variates and densities used by the Gibbs sampler.

All samplers are vectorized over their parameters and draw from an
:class:`~app.sampling.rng.RngStream`. Scalars in give a float out.
"""

import math
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import betaln, digamma, log_ndtr, polygamma

from app.exceptions import DomainError
from app.sampling.models import ArrayLike, PolyaParams
from app.sampling.rng import RngStream

# exponentials generated per chunk of Polya draws
POLYA_CHUNK = 1 << 22
# relative shape gap below which the tail mean uses the trigamma limit
EQUAL_SHAPES = 1e-6
# standardized truncation point above which the exponential proposal is used
TAIL_SWITCH = 0.5

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

Size = Optional[Union[int, Tuple[int, ...]]]


def _shape(size: Size, *params: np.ndarray) -> Tuple[int, ...]:
    if size is None:
        return np.broadcast_shapes(*(p.shape for p in params))
    return (size,) if isinstance(size, (int, np.integer)) else tuple(size)


def _scalar_or_array(values: np.ndarray, shape: Tuple[int, ...]) -> Union[float, np.ndarray]:
    values = values.reshape(shape)
    return float(values) if values.ndim == 0 else values


def _require_positive(name: str, value: ArrayLike) -> np.ndarray:
    value = np.asarray(value, dtype=float)
    if np.any(~(value > 0)):
        raise DomainError(f"{name} must be positive")
    return value


def polya_mean(a: ArrayLike, b: ArrayLike, K: int) -> Union[float, np.ndarray]:
    """Mean of the K-term truncated Polya law, Σ_{k<K} 2/((a+k)(b+k))."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    k = np.arange(K)
    mean = (2.0 / ((a[..., None] + k) * (b[..., None] + k))).sum(axis=-1)
    return float(mean) if mean.ndim == 0 else mean


def polya_tail_mean(a: ArrayLike, b: ArrayLike, K: int) -> Union[float, np.ndarray]:
    """Mean of the terms a K-term Polya draw drops, Σ_{k≥K} 2/((a+k)(b+k)).

    Equals 2(ψ(b+K) − ψ(a+K))/(b − a); equal shapes take the limit 2ψ′(a+K).
    """
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    gap = b - a
    equal = np.abs(gap) < EQUAL_SHAPES * (1.0 + np.abs(a))
    spread = 2.0 * (digamma(b + K) - digamma(a + K)) / np.where(equal, 1.0, gap)
    tail = np.where(equal, 2.0 * polygamma(1, 0.5 * (a + b) + K), spread)
    return float(tail) if tail.ndim == 0 else tail


def sample_polya(params: PolyaParams, rng: RngStream, size: Size = None) -> Union[float, np.ndarray]:
    """Draws from the truncated Polya mixing law q_{a,b}.

    Each draw is λ = Σ_{k<K} 2εₖ / ((a+k)(b+k)) with εₖ iid unit exponentials.
    With ``params.tail_correction`` the dropped terms enter through their
    mean, so the draws have the mean of the full series for any K.

    Args:
        params (PolyaParams): Shapes and truncation; ``a`` and ``b`` broadcast.
        rng (RngStream): Source of randomness.
        size (int | tuple, optional): Number of draws when the shapes are scalar.

    Returns:
        float | numpy.ndarray: Positive draws.
    """
    a = np.asarray(params.a, dtype=float)
    b = np.asarray(params.b, dtype=float)
    K = int(params.K)
    shape = _shape(size, a, b)
    count = int(np.prod(shape, dtype=int))
    k = np.arange(K)
    rows_per_chunk = max(1, POLYA_CHUNK // K)
    out = np.empty(count)

    if a.ndim == 0 and b.ndim == 0:
        rates = 2.0 / ((a + k) * (b + k))
        for start in range(0, count, rows_per_chunk):
            stop = min(count, start + rows_per_chunk)
            out[start:stop] = rng.generator.standard_exponential((stop - start, K)) @ rates
        if params.tail_correction:
            out += polya_tail_mean(a, b, K)
        return _scalar_or_array(out, shape)

    a = np.broadcast_to(a, shape).ravel()
    b = np.broadcast_to(b, shape).ravel()
    for start in range(0, count, rows_per_chunk):
        stop = min(count, start + rows_per_chunk)
        rates = 2.0 / ((a[start:stop, None] + k) * (b[start:stop, None] + k))
        eps = rng.generator.standard_exponential((stop - start, K))
        out[start:stop] = (eps * rates).sum(axis=1)
    if params.tail_correction:
        out += polya_tail_mean(a, b, K)
    return _scalar_or_array(out, shape)


def sample_truncated_normal_positive(
    mean: ArrayLike, variance: ArrayLike, rng: RngStream, size: Size = None
) -> Union[float, np.ndarray]:
    """Draws from N(mean, variance) restricted to (0, ∞).

    Uses an exponential proposal in the far tail (standardized lower bound
    above 0.5) and plain normal rejection otherwise.

    Raises:
        DomainError: If any variance is not positive.
    """
    mean = np.asarray(mean, dtype=float)
    variance = _require_positive("variance", variance)
    shape = _shape(size, mean, variance)
    sd = np.broadcast_to(np.sqrt(variance), shape).ravel()
    lower = np.broadcast_to(-mean, shape).ravel() / sd
    draws = np.empty(lower.size)
    gen = rng.generator

    tail = np.flatnonzero(lower > TAIL_SWITCH)
    rate = 0.5 * (lower[tail] + np.sqrt(lower[tail] ** 2 + 4.0))
    pending = np.arange(tail.size)
    while pending.size:
        idx = tail[pending]
        x = lower[idx] + gen.standard_exponential(pending.size) / rate[pending]
        accept = gen.random(pending.size) <= np.exp(-0.5 * (x - rate[pending]) ** 2)
        draws[idx[accept]] = x[accept]
        pending = pending[~accept]

    pending = np.flatnonzero(lower <= TAIL_SWITCH)
    while pending.size:
        x = gen.standard_normal(pending.size)
        accept = x > lower[pending]
        draws[pending[accept]] = x[accept]
        pending = pending[~accept]

    mean = np.broadcast_to(mean, shape).ravel()
    return _scalar_or_array(mean + sd * draws, shape)


def sample_inverse_gaussian(
    mu: ArrayLike, lam: ArrayLike, rng: RngStream, size: Size = None
) -> Union[float, np.ndarray]:
    """Draws from the inverse Gaussian law with mean ``mu`` and shape ``lam``.

    Transformation with multiple roots. The smaller root is written as
    μ/(1 + s + √(s(s+2))) with s = μν²/(2λ), which stays accurate when μ is
    huge (numpy's ``wald`` cancels catastrophically there).

    Raises:
        DomainError: If ``mu`` or ``lam`` is not positive.
    """
    mu = _require_positive("mu", mu)
    lam = _require_positive("lam", lam)
    shape = _shape(size, mu, lam)
    mu = np.broadcast_to(mu, shape).ravel()
    lam = np.broadcast_to(lam, shape).ravel()
    gen = rng.generator

    s = mu * gen.standard_normal(mu.size) ** 2 / (2.0 * lam)
    root = mu / (1.0 + s + np.sqrt(s * (s + 2.0)))
    take_root = gen.random(mu.size) * (mu + root) <= mu
    return _scalar_or_array(np.where(take_root, root, mu * (mu / root)), shape)


def sample_gig_half(chi: ArrayLike, psi: ArrayLike, rng: RngStream, size: Size = None) -> Union[float, np.ndarray]:
    """Draws from GIG(½, chi, psi) as the reciprocal of an inverse Gaussian."""
    chi = _require_positive("chi", chi)
    psi = _require_positive("psi", psi)
    return 1.0 / sample_inverse_gaussian(np.sqrt(psi / chi), psi, rng, size)


def sample_inverse_gamma(shape: float, scale: float, rng: RngStream, size: Size = None) -> Union[float, np.ndarray]:
    """Draws from the inverse gamma law with density ∝ x^{-shape-1} e^{-scale/x}."""
    shape = _require_positive("shape", shape)
    scale = _require_positive("scale", scale)
    return scale / rng.generator.gamma(shape, 1.0, size)


def z_logpdf(z: ArrayLike, a: float, b: float, sigma: float = 1.0, mu: float = 0.0) -> Union[float, np.ndarray]:
    _require_positive("a", a)
    _require_positive("b", b)
    _require_positive("sigma", sigma)
    u = (np.asarray(z, dtype=float) - mu) / sigma
    out = a * u - (a + b) * np.logaddexp(0.0, u) - math.log(sigma) - betaln(a, b)
    return float(out) if np.ndim(out) == 0 else out


def z_pdf(z: ArrayLike, a: float, b: float, sigma: float = 1.0, mu: float = 0.0) -> Union[float, np.ndarray]:
    """Density of the z-distribution Z(a, b, sigma, mu), evaluated in log space."""
    return np.exp(z_logpdf(z, a, b, sigma, mu))


def z_cdf_at_zero(kappa: ArrayLike, mu: ArrayLike) -> Union[float, np.ndarray]:
    """P(Z ≤ 0) for Z ~ Z(1, κ, 1, μ), that is 1 − (1 + e^{−μ})^{−κ}."""
    kappa = _require_positive("kappa", kappa)
    out = -np.expm1(-kappa * np.logaddexp(0.0, -np.asarray(mu, dtype=float)))
    return float(out) if np.ndim(out) == 0 else out


def normal_logpdf(x: ArrayLike) -> np.ndarray:
    return -0.5 * np.square(x) - LOG_SQRT_2PI


def normal_logcdf(x: ArrayLike) -> np.ndarray:
    return log_ndtr(x)
