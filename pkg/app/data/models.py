"""Datasets and the encoded view of them the sampler works on."""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from app.exceptions import IngestionError


@dataclass(eq=False)
class BinaryDataset:
    """Binary responses with scaled predictors.

    Attributes:
        X (numpy.ndarray): n×p design in scaled units, intercept column first
            when ``intercept`` is set.
        y (numpy.ndarray): Labels in {−1, +1}.
        intercept (bool): Whether column 0 is a column of ones.
        column_scales (numpy.ndarray): Divisors applied to the raw columns
            (1 for the intercept).
        names (List[str]): Column names, aligned with ``X``.
    """
    X: np.ndarray
    y: np.ndarray
    intercept: bool = False
    column_scales: Optional[np.ndarray] = None
    names: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.asarray(self.y, dtype=float).ravel()
        if self.X.shape[0] != self.y.size:
            raise IngestionError(f"Design has {self.X.shape[0]} rows but there are {self.y.size} labels")
        if not np.all(np.isin(self.y, (-1.0, 1.0))):
            raise IngestionError("Binary labels must be -1 or +1")
        if self.column_scales is None:
            self.column_scales = np.ones(self.p)
        if not self.names:
            self.names = default_names(self.p, self.intercept)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(eq=False)
class BinomialDataset:
    """Binomial responses: yᵢ successes out of nᵢ trials at predictors xᵢ.

    Attributes:
        X (numpy.ndarray): m×p design in scaled units.
        successes (numpy.ndarray): yᵢ, integers in [0, nᵢ].
        trials (numpy.ndarray): nᵢ ≥ 1.
        intercept (bool): Whether column 0 is a column of ones.
        column_scales (numpy.ndarray): Divisors applied to the raw columns.
        names (List[str]): Column names.
    """
    X: np.ndarray
    successes: np.ndarray
    trials: np.ndarray
    intercept: bool = False
    column_scales: Optional[np.ndarray] = None
    names: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.successes = np.asarray(self.successes).ravel()
        self.trials = np.asarray(self.trials).ravel()
        if not (self.X.shape[0] == self.successes.size == self.trials.size):
            raise IngestionError("Design, successes and trials must have the same number of rows")
        for name, values in (("successes", self.successes), ("trials", self.trials)):
            if np.any(np.asarray(values, dtype=float) != np.round(np.asarray(values, dtype=float))):
                raise IngestionError(f"Binomial {name} must be whole numbers")
        self.successes = self.successes.astype(int)
        self.trials = self.trials.astype(int)
        if np.any(self.trials < 1):
            raise IngestionError("Every binomial row needs at least one trial")
        if np.any(self.successes < 0) or np.any(self.successes > self.trials):
            raise IngestionError("Binomial successes must lie between 0 and the number of trials")
        if self.column_scales is None:
            self.column_scales = np.ones(self.p)
        if not self.names:
            self.names = default_names(self.p, self.intercept)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def total_trials(self) -> int:
        return int(self.trials.sum())


@dataclass(eq=False)
class EncodedData:
    """Response-multiplied design with per-row multiplicities.

    Attributes:
        yX (numpy.ndarray): Rows yᵢ′xᵢ.
        kappa_vec (numpy.ndarray): κ′ᵢ > 0 at the current κ.
        base_kappa (float): κ the multiplicities were built with.
    """
    yX: np.ndarray
    kappa_vec: np.ndarray
    base_kappa: float = 1.0

    def __post_init__(self):
        self.yX = np.asarray(self.yX, dtype=float)
        if self.yX.ndim != 2:
            raise IngestionError(f"Encoded design must be two-dimensional, got shape {self.yX.shape}")
        self.kappa_vec = np.asarray(self.kappa_vec, dtype=float).ravel()
        if self.yX.shape[0] != self.kappa_vec.size:
            raise IngestionError("Each encoded row needs exactly one multiplicity")
        if np.any(self.kappa_vec <= 0):
            raise IngestionError("Encoded rows must have positive multiplicity")

    @classmethod
    def empty(cls, p: int, kappa: float = 1.0) -> "EncodedData":
        """No rows, for prior-only chains."""
        return cls(np.zeros((0, p)), np.zeros(0), kappa)

    @property
    def n(self) -> int:
        return self.yX.shape[0]

    @property
    def p(self) -> int:
        return self.yX.shape[1]

    def with_kappa(self, kappa: float) -> "EncodedData":
        """Same rows with multiplicities rescaled from ``base_kappa`` to ``kappa``."""
        if kappa == self.base_kappa:
            return self
        return EncodedData(self.yX, self.kappa_vec * (kappa / self.base_kappa), kappa)

    def eta(self, beta: np.ndarray) -> np.ndarray:
        return self.yX @ beta


def default_names(p: int, intercept: bool) -> List[str]:
    if intercept:
        return ["intercept"] + [f"x{j}" for j in range(1, p)]
    return [f"x{j}" for j in range(1, p + 1)]
