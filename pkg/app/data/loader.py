"""Reading CSV tables into scaled datasets."""

import itertools
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from app.data.models import BinaryDataset, BinomialDataset
from app.exceptions import IngestionError

RESPONSE = "y"
TRIALS = "n"
INTERCEPT = "intercept"
INTERACTION_SEPARATOR = "*"

Dataset = Union[BinaryDataset, BinomialDataset]


def read_table(path: Union[str, Path]) -> pd.DataFrame:
    """Reads a UTF-8 comma-separated table with a header row.

    Raises:
        IngestionError: If the file is missing, empty or malformed.
    """
    try:
        table = pd.read_csv(path, encoding="utf-8")
    except FileNotFoundError as e:
        raise IngestionError(f"Data file not found: {path}") from e
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise IngestionError(f"Could not parse {path}: {e}") from e
    table.columns = [str(c).strip() for c in table.columns]
    logging.info(f"Read {len(table)} rows and {table.shape[1]} columns from {path}")
    return table


def _numeric(table: pd.DataFrame, columns: Sequence[str]) -> np.ndarray:
    missing = [c for c in columns if c not in table.columns]
    if missing:
        raise IngestionError(f"Missing columns: {', '.join(missing)}")
    try:
        values = table[list(columns)].apply(pd.to_numeric, errors="raise").to_numpy(dtype=float)
    except (ValueError, TypeError) as e:
        raise IngestionError(f"Non-numeric values in the table: {e}") from e
    if np.isnan(values).any():
        raise IngestionError("The table has empty cells")
    return values


def add_interactions(X: np.ndarray, names: List[str]) -> Tuple[np.ndarray, List[str]]:
    """Appends every pairwise product xⱼxₖ (j < k) after the original columns."""
    pairs = list(itertools.combinations(range(X.shape[1]), 2))
    if not pairs:
        return X, list(names)
    products = np.column_stack([X[:, j] * X[:, k] for j, k in pairs])
    return np.hstack([X, products]), list(names) + [f"{names[j]}{INTERACTION_SEPARATOR}{names[k]}" for j, k in pairs]


def scale_columns(X: np.ndarray, names: Sequence[str]) -> Tuple[np.ndarray, np.ndarray]:
    """Divides each column by its L2 norm.

    Raises:
        IngestionError: On an all-zero column.
    """
    norms = np.linalg.norm(X, axis=0)
    zero = [names[j] for j in np.flatnonzero(norms == 0)]
    if zero:
        raise IngestionError(f"All-zero predictor columns: {', '.join(zero)}")
    return X / norms, norms


def with_intercept(X: np.ndarray, scales: np.ndarray, names: List[str], intercept: bool):
    if not intercept:
        return X, scales, names
    return (
        np.hstack([np.ones((X.shape[0], 1)), X]),
        np.concatenate([[1.0], scales]),
        [INTERCEPT] + names,
    )


def signed_labels(y: np.ndarray) -> np.ndarray:
    """Maps 0/1 labels to −1/+1 and validates ±1 labels."""
    values = set(np.unique(y).tolist())
    if values <= {0.0, 1.0}:
        return np.where(y > 0, 1.0, -1.0)
    if values <= {-1.0, 1.0}:
        return y.astype(float)
    raise IngestionError(f"Binary labels must be 0/1 or -1/+1, found {sorted(values)[:5]}")


def load_and_scale(
    table: pd.DataFrame,
    binomial: bool = False,
    intercept: bool = True,
    interactions: bool = False,
) -> Dataset:
    """Builds a dataset from a table and scales predictors to unit L2 norm.

    Binary tables carry column ``y`` and then predictors; binomial tables carry
    ``y`` (successes), ``n`` (trials) and then predictors. The intercept
    column, when requested, is prepended after scaling and keeps scale 1.

    Raises:
        IngestionError: On missing or non-numeric columns, empty cells, bad
            labels, invalid binomial counts or all-zero predictors.
    """
    reserved = [RESPONSE, TRIALS] if binomial else [RESPONSE]
    names = [c for c in table.columns if c not in reserved]
    if not names and not intercept:
        raise IngestionError("The table has no predictor columns")
    X = _numeric(table, names) if names else np.zeros((len(table), 0))
    if interactions:
        X, names = add_interactions(X, names)
    if names:
        X, scales = scale_columns(X, names)
    else:
        scales = np.zeros(0)
    X, scales, names = with_intercept(X, scales, names, intercept)

    if binomial:
        counts = _numeric(table, reserved)
        return BinomialDataset(X, counts[:, 0], counts[:, 1], intercept, scales, names)
    y = signed_labels(_numeric(table, reserved)[:, 0])
    return BinaryDataset(X, y, intercept, scales, names)


def load_dataset(path: Union[str, Path], binomial: bool = False, intercept: bool = True,
                 interactions: bool = False) -> Dataset:
    return load_and_scale(read_table(path), binomial, intercept, interactions)


def feature_matrix(table: pd.DataFrame, names: Sequence[str], scales: np.ndarray) -> np.ndarray:
    """Predictor matrix in the scaled units of a fitted model.

    Interaction columns named ``a*b`` are rebuilt from their factors when the
    table does not carry them.

    Raises:
        IngestionError: If a needed column is missing.
    """
    columns = []
    for name in names:
        if name == INTERCEPT:
            columns.append(np.ones(len(table)))
        elif name in table.columns:
            columns.append(_numeric(table, [name])[:, 0])
        elif INTERACTION_SEPARATOR in name:
            left, right = name.split(INTERACTION_SEPARATOR, 1)
            factors = _numeric(table, [left, right])
            columns.append(factors[:, 0] * factors[:, 1])
        else:
            raise IngestionError(f"Feature table has no column '{name}'")
    return np.column_stack(columns) / np.asarray(scales, dtype=float)


def back_transform(beta: np.ndarray, column_scales: np.ndarray) -> np.ndarray:
    """Coefficients in raw units, so that x_rawᵀβ_raw = x_scaledᵀβ."""
    return np.asarray(beta, dtype=float) / np.asarray(column_scales, dtype=float)


def fingerprint(dataset: Dataset) -> Dict:
    """Row and column counts plus the stored column norms."""
    rows = dataset.m if isinstance(dataset, BinomialDataset) else dataset.n
    info = {
        "kind": "binomial" if isinstance(dataset, BinomialDataset) else "binary",
        "rows": int(rows),
        "columns": int(dataset.p),
        "intercept": bool(dataset.intercept),
        "names": list(dataset.names),
        "column_norms": [float(s) for s in dataset.column_scales],
    }
    if isinstance(dataset, BinomialDataset):
        info["trials"] = dataset.total_trials
    return info
