import argparse
import json
import logging
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import pandas as pd

from app.data.loader import RESPONSE, feature_matrix, read_table, signed_labels
from app.diagnostics.metrics import expected_log_likelihood, misclassification_rate, predict
from app.exceptions import IngestionError, UsageError
from app.sampling.models import Trace
from app.utils.schemas import FitSummary, PointEstimateRecord, PredictionMetrics
from app.utils.serialization import read_json, read_trace, trace_from_samples, write_json
from app.utils.text_generator import get_prediction_text


def register(subparsers) -> None:
    parser = subparsers.add_parser("predict", help="Predict probabilities from an estimate or a trace")
    parser.add_argument("--model", default=None,
                        help="estimate.json or summary.json (default: summary.json next to --trace)")
    parser.add_argument("--trace", default=None, help="trace.csv; probabilities are averaged over its samples")
    parser.add_argument("--data", required=True, help="CSV with the model's predictor columns")
    parser.add_argument("--truth", nargs="?", const=RESPONSE, default=None,
                        help="Label column for metrics (default name: y)")
    parser.add_argument("--threshold", type=float, default=0.5)
    parser.add_argument("--out", default="predictions.csv")
    parser.set_defaults(handler=handle)


def load_model(path: Union[str, Path]) -> Union[PointEstimateRecord, FitSummary]:
    try:
        keys = json.loads(Path(path).read_text(encoding="utf-8")).keys()
    except FileNotFoundError as e:
        raise IngestionError(f"Model file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise IngestionError(f"{path} is not JSON: {e}") from e
    return read_json(PointEstimateRecord if "kind" in keys else FitSummary, path)


def resolve_estimate(args: argparse.Namespace) -> Tuple[Union[np.ndarray, Trace], List[str], List[float]]:
    """Coefficients (or a trace) together with names and column scales."""
    model_path = args.model
    if model_path is None:
        if args.trace is None:
            raise UsageError("predict needs --model, --trace, or both")
        model_path = Path(args.trace).with_name("summary.json")
        if not model_path.exists():
            model_path = Path(args.trace).with_name("estimate.json")
    model = load_model(model_path)

    if args.trace is not None:
        beta, nu, names = read_trace(args.trace)
        if names != list(model.names):
            raise IngestionError(f"Trace columns do not match the coefficients in {model_path}")
        return trace_from_samples(beta, nu), names, model.column_scales
    if isinstance(model, PointEstimateRecord):
        return np.array(model.beta), model.names, model.column_scales
    return np.array(model.posterior_mean), model.names, model.column_scales


def handle(args: argparse.Namespace) -> int:
    estimate, names, scales = resolve_estimate(args)
    table = read_table(args.data)
    probabilities = predict(estimate, feature_matrix(table, names, np.asarray(scales)))
    classes = np.where(probabilities >= args.threshold, 1, -1)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame({"probability": probabilities, "class": classes}).to_csv(out, index=False, float_format="%.17g")
    logging.info(f"{len(probabilities)} predictions written to {out}")

    if args.truth is not None:
        if args.truth not in table.columns:
            raise IngestionError(f"No label column '{args.truth}' in {args.data}")
        labels = signed_labels(table[args.truth].to_numpy(dtype=float))
        metrics = PredictionMetrics(
            rows=len(labels),
            misclassification=misclassification_rate(labels, probabilities, args.threshold),
            expected_log_likelihood=expected_log_likelihood((labels > 0).astype(float), probabilities),
        )
        write_json(metrics, out.with_suffix(".metrics.json"))
        print(get_prediction_text(metrics))
    return 0
