import argparse
import logging
import time
from datetime import datetime
from pathlib import Path

from app.data.loader import Dataset, back_transform
from app.data.models import EncodedData
from app.diagnostics.metrics import diagnose_trace
from app.exceptions import UsageError
from app.handlers.universal import (
    add_data_arguments,
    add_sampler_arguments,
    build_config,
    load_encoded,
    replay,
    require_kept,
    write_manifest,
)
from app.sampling.models import AnnealSchedule, EstimateKind, PointEstimate, PriorSpec, Trace
from app.sampling.sampler import anneal, estimate_two_stage_nu, log_power_posterior
from app.utils.constants import DEFAULT_SCHEDULE
from app.utils.schemas import PointEstimateRecord, StageRecord
from app.utils.serialization import write_json, write_trace
from app.utils.text_generator import get_estimate_text
from config import STAGE_BURN_IN


def register(subparsers) -> None:
    parser = subparsers.add_parser("anneal", help="Anneal over kappa for a MAP or MLE estimate")
    add_data_arguments(parser)
    parser.add_argument("--schedule", default=str(AnnealSchedule(DEFAULT_SCHEDULE)),
                        help="Comma-separated kappa:iterations stages, nondecreasing in kappa")
    parser.add_argument("--mle", action="store_true", help="Disable the penalty; the estimate is the MLE")
    parser.add_argument("--two-stage-nu", action="store_true",
                        help="Estimate nu at kappa=1 first, then anneal with nu fixed")
    add_sampler_arguments(parser, iterations=1000, burn_in=STAGE_BURN_IN)
    parser.set_defaults(handler=handle)


def stage_record(trace: Trace) -> StageRecord:
    diagnostics = diagnose_trace(trace)
    return StageRecord(
        kappa=trace.kappa,
        iterations=trace.iterations,
        burn_in=trace.burn_in,
        wall_time=trace.wall_time,
        acceptance_rate=diagnostics.acceptance_rate,
        ess_min=float(diagnostics.ess.min()),
        nu_mean=float(trace.kept_nu.mean()),
    )


def estimate_record(estimate: PointEstimate, dataset: Dataset, data: EncodedData, prior: PriorSpec) -> PointEstimateRecord:
    final_kappa = estimate.schedule.stages[-1][0]
    nu = None if estimate.kind == EstimateKind.mle else estimate.nu
    return PointEstimateRecord(
        kind=estimate.kind.value,
        names=list(dataset.names),
        beta=estimate.beta.tolist(),
        beta_raw=back_transform(estimate.beta, dataset.column_scales).tolist(),
        nu=nu,
        nu_fixed=estimate.nu_fixed,
        schedule=str(estimate.schedule),
        log_power_posterior=log_power_posterior(estimate.beta, data, prior, nu or 1.0, final_kappa),
        column_scales=[float(s) for s in dataset.column_scales],
        intercept=dataset.intercept,
        stages=[stage_record(t) for t in estimate.traces],
    )


def handle(args: argparse.Namespace) -> int:
    args = replay(args)
    started_at, started = datetime.now(), time.perf_counter()
    if args.mle and args.two_stage_nu:
        raise UsageError("--mle and --two-stage-nu cannot be combined")
    schedule = AnnealSchedule.parse(args.schedule)
    if args.two_stage_nu:
        require_kept(args.S, args.burn, "The kappa=1 chain for nu")
    for kappa, iterations in schedule.stages:
        require_kept(iterations, args.burn, f"Stage kappa={kappa:g}")

    dataset, data = load_encoded(args)
    config = build_config(args, dataset, kappa=schedule.stages[0][0], penalize=not args.mle)
    if args.two_stage_nu:
        estimate = estimate_two_stage_nu(config, data, schedule)
    else:
        estimate = anneal(schedule, config, data)
    logging.info(f"✅ {estimate.kind.value} estimate after {len(estimate.traces)} stages")

    record = estimate_record(estimate, dataset, data, config.prior)
    out = Path(args.out)
    outputs = {
        "estimate": write_json(record, out / "estimate.json"),
        "trace": write_trace(estimate.traces[-1], dataset.names, out / "trace.csv"),
    }
    write_manifest(args, "anneal", dataset, outputs, started_at, started)
    print(get_estimate_text(record))
    return 0
