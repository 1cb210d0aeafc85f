"""Chain quality and predictive metrics."""

import logging
from dataclasses import dataclass
from typing import Callable, Tuple, Union

import numpy as np
from numpy.fft import irfft, rfft
from scipy.special import expit

from app.exceptions import DomainError, UsageError
from app.sampling.models import Trace
from app.utils.constants import PROBABILITY_CLAMP

MIN_SERIES_LENGTH = 10
# contiguous batches behind batch-means standard errors
BATCHES = 20


@dataclass
class ChainDiagnostics:
    """Per-stage chain quality.

    Attributes:
        ess (numpy.ndarray): Effective sample size of each β coordinate.
        ess_nu (float): Effective sample size of ν (1 when ν is fixed).
        degenerate (numpy.ndarray): Coordinates whose kept samples are constant.
        acceptance_rate (float): Accepted over proposed λ moves.
        wall_time (float): Seconds spent in the stage.
        kept (int): Number of post-burn-in samples.
    """
    ess: np.ndarray
    ess_nu: float
    degenerate: np.ndarray
    acceptance_rate: float
    wall_time: float
    kept: int


def autocorrelation(series: np.ndarray) -> np.ndarray:
    """Sample autocorrelation at lags 0..S−1 through a zero-padded FFT."""
    x = np.asarray(series, dtype=float) - np.mean(series)
    S = x.size
    acov = irfft(np.abs(rfft(x, n=2 * S)) ** 2, n=2 * S)[:S] / S
    return acov / acov[0]


def ess_with_flag(series) -> Tuple[float, bool]:
    """ESS and whether the series is constant."""
    series = np.asarray(series, dtype=float).ravel()
    S = series.size
    if S < MIN_SERIES_LENGTH:
        raise DomainError(f"ESS needs at least {MIN_SERIES_LENGTH} samples, got {S}")
    if np.ptp(series) == 0:
        return 1.0, True

    rho = autocorrelation(series)
    pairs = rho[: 2 * (S // 2)].reshape(-1, 2).sum(axis=1)
    # initial positive sequence: stop at the first non-positive pair
    cut = np.flatnonzero(pairs <= 0)
    pairs = pairs[: cut[0]] if cut.size else pairs
    tau = -1.0 + 2.0 * pairs.sum()
    if tau <= 0:
        return float(S), False
    return float(min(S, S / tau)), False


def effective_sample_size(series) -> float:
    """Effective sample size S/τ with τ = 1 + 2Σρ̂ₜ truncated by Geyer's rule.

    A constant series gets ESS 1.

    Raises:
        DomainError: For fewer than 10 samples.
    """
    ess, degenerate = ess_with_flag(series)
    if degenerate:
        logging.warning("⚠️ Constant series, reporting ESS 1")
    return ess


def interquartile_range(samples) -> np.ndarray:
    """Column-wise 75th minus 25th percentile."""
    upper, lower = np.percentile(np.asarray(samples, dtype=float), [75, 25], axis=0)
    return upper - lower


def batch_means_se(samples, statistic: Callable[[np.ndarray], np.ndarray] = interquartile_range,
                   batches: int = BATCHES) -> np.ndarray:
    """Monte Carlo standard error of a column-wise chain statistic.

    The kept samples are cut into contiguous batches; the spread of the
    statistic across batches, over √batches, estimates the error of the
    full-chain value as long as autocorrelation dies out within a batch.

    Raises:
        DomainError: When a batch would hold fewer than 10 samples.
    """
    samples = np.asarray(samples, dtype=float)
    size = samples.shape[0] // batches
    if batches < 2 or size < MIN_SERIES_LENGTH:
        raise DomainError(f"Batch means need {batches} batches of at least {MIN_SERIES_LENGTH} samples")
    values = np.array([statistic(samples[i * size:(i + 1) * size]) for i in range(batches)])
    return values.std(axis=0, ddof=1) / np.sqrt(batches)


def diagnose_trace(trace: Trace) -> ChainDiagnostics:
    kept = trace.kept_beta
    results = [ess_with_flag(kept[:, j]) for j in range(kept.shape[1])]
    ess_nu, _ = ess_with_flag(trace.kept_nu)
    return ChainDiagnostics(
        ess=np.array([r[0] for r in results]),
        ess_nu=ess_nu,
        degenerate=np.array([r[1] for r in results], dtype=bool),
        acceptance_rate=trace.acceptance_rate,
        wall_time=trace.wall_time,
        kept=kept.shape[0],
    )


def expected_log_likelihood(true_p, est_p) -> float:
    """Mean of (1−pᵢ)log(1−p̂ᵢ) + pᵢ log p̂ᵢ, with p̂ clamped away from 0 and 1."""
    true_p = np.asarray(true_p, dtype=float)
    est_p = np.clip(np.asarray(est_p, dtype=float), PROBABILITY_CLAMP, 1.0 - PROBABILITY_CLAMP)
    return float(np.mean((1.0 - true_p) * np.log1p(-est_p) + true_p * np.log(est_p)))


def as_signed_labels(labels) -> np.ndarray:
    labels = np.asarray(labels, dtype=float)
    return np.where(labels > 0, 1.0, -1.0)


def misclassification_rate(labels, est_p, threshold: float = 0.5) -> float:
    """Share of labels on the wrong side of ``threshold``; p̂ = threshold counts as +1.

    Labels may be ±1 or 0/1.
    """
    labels = as_signed_labels(labels)
    est_p = np.asarray(est_p, dtype=float)
    if labels.shape != est_p.shape:
        raise UsageError(f"{labels.size} labels but {est_p.size} probabilities")
    predicted = np.where(est_p >= threshold, 1.0, -1.0)
    return float(np.mean(predicted != labels))


def predict(estimate: Union[np.ndarray, Trace], X) -> np.ndarray:
    """P(y = +1 | x) per row of ``X``.

    A coefficient vector gives plug-in probabilities; a trace gives the
    average over its post-burn-in samples.

    Raises:
        UsageError: If ``X`` does not have one column per coefficient.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    betas = estimate.kept_beta if isinstance(estimate, Trace) else np.atleast_2d(estimate)
    if X.shape[1] != betas.shape[1]:
        raise UsageError(f"Design has {X.shape[1]} columns but there are {betas.shape[1]} coefficients")
    return expit(X @ betas.T).mean(axis=1)
