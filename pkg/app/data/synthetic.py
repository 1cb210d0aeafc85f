"""Synthetic datasets for the built-in experiments and the test suite.

Every generator draws from an :class:`~app.sampling.rng.RngStream` and
returns scaled datasets together with the true coefficients in raw units
(intercept first).
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import expit

from app.data.loader import scale_columns, with_intercept
from app.data.models import BinaryDataset, BinomialDataset, default_names
from app.sampling.rng import RngStream

BINOMIAL_SLOPES = np.array([2.0, -3.0, 2.0, -4.0, 0.0, 0.0, 0.0, 0.0, 0.0])
SPARSE_SLOPES = np.array([2.0, -3.0, 0.74, -0.9])
TRUE_INTERCEPT = 1.0

# predictor positions (1-based) that carry no signal in the shrinkage surrogate
IRRELEVANT_COLUMNS = (4, 5)


@dataclass
class PredictiveSplit:
    """Training data plus a binomial test set with known probabilities.

    Attributes:
        train (BinomialDataset): Scaled training subjects.
        test_X (numpy.ndarray): Test predictors in the training scaling.
        test_successes (numpy.ndarray): Successes per test subject.
        test_trials (numpy.ndarray): Trials per test subject.
        test_p (numpy.ndarray): True success probabilities of the test subjects.
        beta (numpy.ndarray): True raw coefficients, intercept first.
    """
    train: BinomialDataset
    test_X: np.ndarray
    test_successes: np.ndarray
    test_trials: np.ndarray
    test_p: np.ndarray
    beta: np.ndarray


def _scaled(X_raw: np.ndarray, intercept: bool):
    names = default_names(X_raw.shape[1] + int(intercept), intercept)
    predictors = names[1:] if intercept else names
    X, scales = scale_columns(X_raw, predictors)
    return with_intercept(X, scales, list(predictors), intercept)


def binomial_testbed(rng: RngStream, m: int = 100, trials: int = 20) -> Tuple[BinomialDataset, np.ndarray]:
    """η = 1 + xᵀβ with β = (2, −3, 2, −4, 0, 0, 0, 0, 0), x uniform on [0, 1]⁹."""
    gen = rng.generator
    X_raw = gen.random((m, BINOMIAL_SLOPES.size))
    probabilities = expit(TRUE_INTERCEPT + X_raw @ BINOMIAL_SLOPES)
    n_i = np.full(m, trials)
    successes = gen.binomial(n_i, probabilities)
    X, scales, names = _scaled(X_raw, True)
    beta = np.concatenate([[TRUE_INTERCEPT], BINOMIAL_SLOPES])
    return BinomialDataset(X, successes, n_i, True, scales, names), beta


def sparse_predictive_split(
    rng: RngStream,
    p: int = 100,
    subjects: int = 20,
    trials: int = 5,
    test_subjects: int = 100,
    test_trials: int = 100,
) -> PredictiveSplit:
    """p ≫ n study: β = (2, −3, 0.74, −0.9, 0, …) with p − 1 slopes.

    Training and test predictors are uniform on the unit cube; the test set
    is scaled with the training column norms.
    """
    slopes = np.zeros(p - 1)
    slopes[: SPARSE_SLOPES.size] = SPARSE_SLOPES[: p - 1]
    gen = rng.generator
    X_raw = gen.random((subjects, p - 1))
    successes = gen.binomial(trials, expit(TRUE_INTERCEPT + X_raw @ slopes))
    X, scales, names = _scaled(X_raw, True)
    train = BinomialDataset(X, successes, np.full(subjects, trials), True, scales, names)

    test_raw = gen.random((test_subjects, p - 1))
    test_p = expit(TRUE_INTERCEPT + test_raw @ slopes)
    test_successes = gen.binomial(test_trials, test_p)
    test_X = np.hstack([np.ones((test_subjects, 1)), test_raw]) / scales
    return PredictiveSplit(
        train, test_X, test_successes, np.full(test_subjects, test_trials), test_p,
        np.concatenate([[TRUE_INTERCEPT], slopes]),
    )


def shrinkage_surrogate(rng: RngStream, pairs: int = 150) -> Tuple[BinaryDataset, np.ndarray]:
    """Binary data with eight predictors, two of which carry no signal.

    Rows come in pairs sharing the informative predictors and the label. The
    irrelevant columns take values +v and −v within a pair and are zero on
    the other half of the pairs, each column on its own half. The likelihood
    is then symmetric in each irrelevant coefficient, so their posterior is
    symmetric about zero and the mode sits at zero.
    """
    gen = rng.generator
    informative = np.array([1.2, 0.9, -0.7, 0.0, 0.0, 0.5, -0.4, 0.6])
    base = gen.standard_normal((pairs, 8))
    labels = np.where(gen.random(pairs) < expit(-0.5 + base @ informative), 1.0, -1.0)

    magnitude = gen.uniform(0.5, 2.0, pairs)
    first, second = (c - 1 for c in IRRELEVANT_COLUMNS)
    base[:, [first, second]] = 0.0
    X_raw = np.repeat(base, 2, axis=0)
    sign = np.tile([1.0, -1.0], pairs)
    half = pairs // 2
    owner = np.repeat(np.where(np.arange(pairs) < half, first, second), 2)
    X_raw[np.arange(2 * pairs), owner] = sign * np.repeat(magnitude, 2)

    X, scales, names = _scaled(X_raw, True)
    beta = np.concatenate([[-0.5], informative])
    return BinaryDataset(X, np.repeat(labels, 2), True, scales, names), beta


def logistic_design(
    rng: RngStream,
    n: int,
    slopes: np.ndarray,
    intercept: Optional[float] = None,
) -> Tuple[BinaryDataset, np.ndarray]:
    """Gaussian predictors and binary labels drawn from the logistic model."""
    gen = rng.generator
    slopes = np.asarray(slopes, dtype=float)
    X_raw = gen.standard_normal((n, slopes.size))
    eta = X_raw @ slopes + (intercept or 0.0)
    y = np.where(gen.random(n) < expit(eta), 1.0, -1.0)
    has_intercept = intercept is not None
    X, scales, names = _scaled(X_raw, has_intercept)
    beta = np.concatenate([[intercept], slopes]) if has_intercept else slopes
    return BinaryDataset(X, y, has_intercept, scales, names), beta


def well_conditioned(rng: RngStream, n: int = 200) -> Tuple[BinaryDataset, np.ndarray]:
    """n = 200 rows, intercept plus four moderate slopes."""
    return logistic_design(rng, n, np.array([0.8, -0.6, 0.5, -0.4]), intercept=0.3)


def quadrature_toy(rng: RngStream, p: int) -> Tuple[BinaryDataset, np.ndarray]:
    """One predictor with 20 rows, or two predictors with 30 rows, no intercept."""
    if p == 1:
        return logistic_design(rng, 20, np.array([1.0]))
    return logistic_design(rng, 30, np.array([1.0, -0.5]))
