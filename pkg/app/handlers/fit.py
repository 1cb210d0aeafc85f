import argparse
import time
from datetime import datetime
from pathlib import Path

import numpy as np

from app.data.loader import Dataset, back_transform
from app.diagnostics.metrics import diagnose_trace
from app.handlers.universal import (
    add_data_arguments,
    add_sampler_arguments,
    build_config,
    load_encoded,
    replay,
    require_kept,
    write_manifest,
)
from app.sampling.models import Trace
from app.sampling.sampler import run_chain
from app.utils.schemas import FitSummary
from app.utils.serialization import write_json, write_trace
from app.utils.text_generator import get_fit_summary_text


def register(subparsers) -> None:
    parser = subparsers.add_parser("fit", help="Run one Gibbs chain at a fixed kappa")
    add_data_arguments(parser)
    parser.add_argument("--kappa", type=float, default=1.0, help="Multiplicity of the power posterior")
    add_sampler_arguments(parser, iterations=1000, burn_in=100)
    parser.set_defaults(handler=handle)


def rejection_stats(rejections: np.ndarray) -> dict:
    return {
        "median": float(np.median(rejections)),
        "mean": float(rejections.mean()),
        "q95": float(np.quantile(rejections, 0.95)),
        "max": float(rejections.max()),
    }


def summarize_trace(trace: Trace, dataset: Dataset) -> FitSummary:
    diagnostics = diagnose_trace(trace)
    mean = trace.posterior_mean()
    slice_stats = None
    if trace.slice_rejections is not None and trace.slice_rejections.size:
        slice_stats = rejection_stats(trace.slice_rejections[trace.burn_in:])
    return FitSummary(
        names=list(dataset.names),
        kappa=trace.kappa,
        kept=diagnostics.kept,
        posterior_mean=mean.tolist(),
        posterior_sd=trace.posterior_sd().tolist(),
        posterior_mean_raw=back_transform(mean, dataset.column_scales).tolist(),
        ess=diagnostics.ess.tolist(),
        degenerate=diagnostics.degenerate.tolist(),
        nu_mean=float(trace.kept_nu.mean()),
        nu_sd=float(trace.kept_nu.std(ddof=1)),
        ess_nu=diagnostics.ess_nu,
        acceptance_rate=diagnostics.acceptance_rate,
        wall_time=trace.wall_time,
        column_scales=[float(s) for s in dataset.column_scales],
        intercept=dataset.intercept,
        slice_rejections=slice_stats,
    )


def handle(args: argparse.Namespace) -> int:
    args = replay(args)
    started_at, started = datetime.now(), time.perf_counter()
    require_kept(args.S, args.burn, "The chain")

    dataset, data = load_encoded(args)
    config = build_config(args, dataset, kappa=args.kappa)
    trace = run_chain(config, data)
    summary = summarize_trace(trace, dataset)

    out = Path(args.out)
    outputs = {
        "trace": write_trace(trace, dataset.names, out / "trace.csv"),
        "summary": write_json(summary, out / "summary.json"),
    }
    write_manifest(args, "fit", dataset, outputs, started_at, started)
    print(get_fit_summary_text(summary))
    return 0
