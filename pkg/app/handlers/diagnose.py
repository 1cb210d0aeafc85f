import argparse
from pathlib import Path

import numpy as np

from app.diagnostics.metrics import diagnose_trace
from app.exceptions import UsageError
from app.utils.schemas import TraceDiagnostics
from app.utils.serialization import read_trace, trace_from_samples, write_json
from app.utils.text_generator import get_key_value_text


def register(subparsers) -> None:
    parser = subparsers.add_parser("diagnose", help="Effective sample sizes of a stored trace")
    parser.add_argument("--trace", required=True, help="trace.csv written by fit or anneal")
    parser.add_argument("--burn", type=int, default=0, help="Extra leading samples to drop")
    parser.add_argument("--out", default=None, help="Where to write the diagnostics JSON")
    parser.set_defaults(handler=handle)


def diagnose_file(path, burn: int = 0) -> TraceDiagnostics:
    beta, nu, names = read_trace(path)
    if not 0 <= burn < beta.shape[0]:
        raise UsageError(f"Cannot drop {burn} of {beta.shape[0]} samples")
    trace = trace_from_samples(beta[burn:], nu[burn:])
    diagnostics = diagnose_trace(trace)
    return TraceDiagnostics(
        names=names,
        samples=diagnostics.kept,
        mean=trace.posterior_mean().tolist(),
        sd=trace.posterior_sd().tolist(),
        ess=diagnostics.ess.tolist(),
        degenerate=diagnostics.degenerate.tolist(),
        ess_nu=diagnostics.ess_nu,
    )


def handle(args: argparse.Namespace) -> int:
    report = diagnose_file(args.trace, args.burn)
    out = Path(args.out) if args.out else Path(args.trace).with_name("diagnostics.json")
    write_json(report, out)
    values = {f"ESS {name}": ess for name, ess in zip(report.names, report.ess)}
    values["ESS nu"] = report.ess_nu
    values["min ESS"] = float(np.min(report.ess))
    print(get_key_value_text(f"Trace diagnostics ({report.samples} samples)", values))
    return 0
