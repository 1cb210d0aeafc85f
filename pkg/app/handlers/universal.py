"""Flags and builders shared by the fitting commands."""

import argparse
import logging
import time
from datetime import datetime
from pathlib import Path
from typing import Dict, Optional, Tuple

from app.data.encoding import encode_binary, flatten, multiplicity_encode
from app.data.loader import Dataset, fingerprint, load_dataset
from app.data.models import BinomialDataset, EncodedData
from app.diagnostics.metrics import MIN_SERIES_LENGTH
from app.exceptions import UsageError
from app.sampling.models import (
    LambdaMethod,
    NuMode,
    PriorSpec,
    Representation,
    RepresentationKind,
    SamplerConfig,
    SolverKind,
)
from app.utils.constants import FIXED_NU_PATTERN
from app.utils.schemas import RunManifest
from app.utils.serialization import library_versions, read_json, write_json
from config import (
    DEFAULT_SEED,
    POLYA_TRUNCATION,
    PRIOR_D,
    PRIOR_R,
    SLICE_MAX_REJECTIONS,
    THREADS,
)

# flags that never go into a manifest
TRANSIENT_FLAGS = ("handler", "replay", "verbose")


def add_data_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("data")
    group.add_argument("--data", help="CSV with column y (and n for binomial data) followed by predictors")
    group.add_argument("--binomial", action="store_true", help="Rows are binomial counts with columns y, n")
    group.add_argument("--encoding", choices=["multi", "flat"], default="multi",
                       help="Binomial encoding: two signed rows per subject, or one row per trial")
    group.add_argument("--no-intercept", dest="intercept", action="store_false",
                       help="Do not prepend an unpenalized intercept column")
    group.add_argument("--interactions", action="store_true", help="Add all pairwise predictor products")


def add_sampler_arguments(parser: argparse.ArgumentParser, iterations: int, burn_in: int) -> None:
    group = parser.add_argument_group("sampler")
    group.add_argument("--alpha", type=int, choices=[1, 2], default=1, help="1 for the lasso, 2 for the ridge")
    group.add_argument("--rep", choices=[k.value for k in RepresentationKind], default="pdf")
    group.add_argument("--a", type=float, default=0.5, help="First Polya shape of the pdf representation")
    group.add_argument("--b", type=float, default=None, help="Second Polya shape; must satisfy a + b = kappa")
    group.add_argument("--r", type=float, default=PRIOR_R, help="Shape of the nu hyperprior")
    group.add_argument("--d", type=float, default=PRIOR_D, help="Scale of the nu hyperprior")
    group.add_argument("--nu", default=NuMode.sample_nu.value,
                       help="sample_nu, sample_nu_sq or fixed:VALUE")
    group.add_argument("--lambda-method", choices=[m.value for m in LambdaMethod], default="mh")
    group.add_argument("--S", type=int, default=iterations, help="Sweeps, burn-in included")
    group.add_argument("--burn", type=int, default=burn_in, help="Burn-in sweeps")
    group.add_argument("--K", type=int, default=POLYA_TRUNCATION, help="Terms kept in Polya draws")
    group.add_argument("--thin", type=int, default=None, help="MH steps per sweep (default ceil(kappa') per row)")
    group.add_argument("--solver", choices=[s.value for s in SolverKind], default="auto")
    group.add_argument("--slice-cap", type=int, default=SLICE_MAX_REJECTIONS,
                       help="Inner-loop rejection cap of the slice update")
    group.add_argument("--record-latents", action="store_true", help="Keep lambda samples in memory")
    group.add_argument("--seed", type=int, default=DEFAULT_SEED)
    group.add_argument("--threads", type=int, default=THREADS)
    group.add_argument("--out", default="results", help="Output directory")
    group.add_argument("--replay", default=None, help="Rerun the command recorded in a manifest")


def parse_nu(text: str) -> Tuple[NuMode, Optional[float]]:
    """Parses ``sample_nu``, ``sample_nu_sq`` or ``fixed:VALUE``."""
    match = FIXED_NU_PATTERN.match(text)
    if match:
        return NuMode.fixed, float(match.group(1))
    try:
        mode = NuMode(text)
    except ValueError as e:
        raise UsageError(f"Unknown nu mode '{text}', expected sample_nu, sample_nu_sq or fixed:VALUE") from e
    if mode == NuMode.fixed:
        raise UsageError("A fixed nu needs a value, e.g. fixed:6")
    return mode, None


def load_encoded(args: argparse.Namespace) -> Tuple[Dataset, EncodedData]:
    """Reads ``--data`` and encodes it at κ = 1."""
    if not args.data:
        raise UsageError("--data is required")
    dataset = load_dataset(args.data, args.binomial, args.intercept, args.interactions)
    if isinstance(dataset, BinomialDataset):
        encoder = multiplicity_encode if args.encoding == "multi" else flatten
        data = encoder(dataset, 1.0)
        logging.info(f"{dataset.m} binomial subjects encoded into {data.n} rows ({args.encoding})")
    else:
        data = encode_binary(dataset, 1.0)
    return dataset, data


def build_config(args: argparse.Namespace, dataset: Dataset, kappa: float = 1.0, penalize: bool = True) -> SamplerConfig:
    """SamplerConfig from the sampler flags."""
    nu_mode, nu_value = parse_nu(args.nu)
    prior = PriorSpec.build(
        dataset.p, dataset.intercept, args.alpha, args.r, args.d, nu_mode, nu_value, penalize=penalize
    )
    if args.rep == RepresentationKind.cdf.value:
        rep = Representation.cdf()
    else:
        rep = Representation.pdf(args.a, args.b)
    return SamplerConfig(
        rep=rep,
        prior=prior,
        kappa=kappa,
        lambda_method=LambdaMethod(args.lambda_method),
        iterations=args.S,
        burn_in=args.burn,
        polya_truncation=args.K,
        seed=args.seed,
        thin=args.thin,
        threads=args.threads,
        solver=SolverKind(args.solver),
        slice_max_rejections=args.slice_cap,
        record_latents=args.record_latents,
    )


def require_kept(iterations: int, burn_in: int, label: str) -> None:
    """Rejects a chain that would keep too few samples for its diagnostics.

    Burn-in is capped one below the chain length, as in ``SamplerConfig.at_kappa``.
    """
    kept = iterations - min(burn_in, iterations - 1)
    if kept < MIN_SERIES_LENGTH:
        raise UsageError(
            f"{label} keeps {kept} of {iterations} sweeps after burn-in {burn_in}; "
            f"at least {MIN_SERIES_LENGTH} are needed, lower --burn or run longer"
        )


def replay(args: argparse.Namespace) -> argparse.Namespace:
    """Replaces the parsed flags with those recorded in ``--replay``."""
    if not getattr(args, "replay", None):
        return args
    manifest = read_json(RunManifest, args.replay)
    logging.info(f"Replaying '{manifest.command}' from {args.replay}")
    replayed = argparse.Namespace(**manifest.config)
    for name in TRANSIENT_FLAGS:
        setattr(replayed, name, getattr(args, name, None))
    replayed.replay = None
    # outputs go where the replaying command points
    replayed.out = args.out
    return replayed


def write_manifest(
    args: argparse.Namespace,
    command: str,
    dataset: Optional[Dataset],
    outputs: Dict[str, Path],
    started_at: datetime,
    started: float,
) -> Path:
    config = {k: v for k, v in vars(args).items() if k not in TRANSIENT_FLAGS}
    manifest = RunManifest(
        command=command,
        config=config,
        dataset=fingerprint(dataset) if dataset is not None else {},
        seed=args.seed,
        threads=args.threads,
        versions=library_versions(),
        started_at=started_at,
        wall_time=time.perf_counter() - started,
        outputs={name: str(path) for name, path in outputs.items()},
    )
    return write_json(manifest, Path(args.out) / "manifest.json")
