"""Turning datasets into the response-multiplied rows the sampler consumes."""

import numpy as np

from app.data.models import BinaryDataset, BinomialDataset, EncodedData


def encode_binary(dataset: BinaryDataset, kappa: float = 1.0) -> EncodedData:
    return EncodedData(dataset.y[:, None] * dataset.X, np.full(dataset.n, float(kappa)), kappa)


def flatten(dataset: BinomialDataset, kappa: float = 1.0) -> EncodedData:
    """One binary row per trial: yᵢ rows labelled +1 and nᵢ−yᵢ labelled −1.

    Every row gets multiplicity κ.
    """
    rows = np.repeat(np.arange(dataset.m), dataset.trials)
    # position of each trial inside its subject
    offset = np.arange(rows.size) - np.repeat(np.cumsum(dataset.trials) - dataset.trials, dataset.trials)
    labels = np.where(offset < dataset.successes[rows], 1.0, -1.0)
    return EncodedData(labels[:, None] * dataset.X[rows], np.full(rows.size, float(kappa)), kappa)


def multiplicity_encode(dataset: BinomialDataset, kappa: float = 1.0) -> EncodedData:
    """Two signed rows per subject, (+xᵢ, κyᵢ) and (−xᵢ, κ(nᵢ−yᵢ)).

    Rows whose multiplicity is zero are dropped.
    """
    signs = np.tile([1.0, -1.0], dataset.m)
    rows = np.repeat(np.arange(dataset.m), 2)
    counts = np.column_stack([dataset.successes, dataset.trials - dataset.successes]).ravel()
    keep = counts > 0
    yX = signs[keep, None] * dataset.X[rows[keep]]
    return EncodedData(yX, kappa * counts[keep].astype(float), kappa)


def powered_log_likelihood(data: EncodedData, beta: np.ndarray) -> float:
    """Σᵢ −κ′ᵢ log(1 + e^{−yᵢ′xᵢᵀβ})."""
    return float(-(data.kappa_vec * np.logaddexp(0.0, -data.eta(beta))).sum())
