"""Reading and writing trace CSVs and JSON artifacts."""

import logging
import platform
from pathlib import Path
from typing import List, Tuple, Type, TypeVar, Union

import numpy as np
import pandas as pd
import pydantic
import scipy
from pydantic import BaseModel, ValidationError

from app.exceptions import IngestionError
from app.sampling.models import Trace

NU_COLUMN = "nu"
# shortest repr that round-trips a float64
FLOAT_FORMAT = "%.17g"

Model = TypeVar("Model", bound=BaseModel)


def write_trace(trace: Trace, names: List[str], path: Union[str, Path]) -> Path:
    """One row per kept sample: the coefficients in scaled units, then ν."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(trace.kept_beta, columns=list(names))
    frame[NU_COLUMN] = trace.kept_nu
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logging.info(f"Trace with {len(frame)} samples written to {path}")
    return path


def read_trace(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray, List[str]]:
    """Returns (β samples, ν samples, coefficient names) from a trace CSV."""
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError as e:
        raise IngestionError(f"Trace file not found: {path}") from e
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise IngestionError(f"Could not parse trace {path}: {e}") from e
    if NU_COLUMN not in frame.columns:
        raise IngestionError(f"Trace {path} has no '{NU_COLUMN}' column")
    names = [c for c in frame.columns if c != NU_COLUMN]
    return frame[names].to_numpy(dtype=float), frame[NU_COLUMN].to_numpy(dtype=float), names


def trace_from_samples(beta: np.ndarray, nu: np.ndarray) -> Trace:
    """Wraps samples read from disk; all of them count as kept."""
    S = beta.shape[0]
    return Trace(
        kappa=float("nan"),
        beta=beta,
        nu=nu,
        burn_in=0,
        lambda_accepted=np.zeros(S, dtype=int),
        lambda_proposals=np.zeros(S, dtype=int),
    )


def write_json(record: BaseModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(record.model_dump_json(indent=2), encoding="utf-8")
    logging.info(f"{type(record).__name__} written to {path}")
    return path


def read_json(model: Type[Model], path: Union[str, Path]) -> Model:
    try:
        return model.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise IngestionError(f"File not found: {path}") from e
    except ValidationError as e:
        raise IngestionError(f"{path} is not a valid {model.__name__}: {e}") from e


def library_versions() -> dict:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "pydantic": pydantic.VERSION,
    }
