"""Built-in experiments: shrinkage under annealing, λ update comparison,
MH acceptance, p ≫ n prediction and the MLE check.

Each experiment is a plain function returning a JSON-ready dict, so the
test suite can call them without going through argparse.
"""

import argparse
import logging
from dataclasses import replace
from pathlib import Path
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError

from app.data.encoding import encode_binary, flatten, multiplicity_encode
from app.data.loader import load_dataset
from app.data.synthetic import (
    IRRELEVANT_COLUMNS,
    binomial_testbed,
    shrinkage_surrogate,
    sparse_predictive_split,
    well_conditioned,
)
from app.diagnostics.metrics import (
    BATCHES,
    MIN_SERIES_LENGTH,
    batch_means_se,
    diagnose_trace,
    expected_log_likelihood,
    interquartile_range,
    misclassification_rate,
    predict,
)
from app.diagnostics.oracles import irls_mle
from app.exceptions import NumericalError
from app.handlers.fit import rejection_stats
from app.sampling.models import (
    AnnealSchedule,
    LambdaMethod,
    NuMode,
    PriorSpec,
    Representation,
    SamplerConfig,
    Trace,
)
from app.sampling.rng import RngStream
from app.sampling.sampler import anneal, run_chain
from app.utils.constants import DEFAULT_SCHEDULE
from app.utils.schemas import ExperimentReport
from app.utils.serialization import write_json
from app.utils.text_generator import get_key_value_text
from config import DEFAULT_SEED

SHRINKAGE_NU = 6.0
SHRINKAGE_KAPPAS = (1.0, 5.0, 10.0, 20.0)
ACCEPTANCE_KAPPAS = (1.0, 20.0)


def register(subparsers) -> None:
    parser = subparsers.add_parser("experiment", help="Run one of the built-in experiments")
    parser.add_argument("name", choices=sorted(EXPERIMENTS))
    parser.add_argument("--data", default=None, help="Binary CSV for the shrinkage experiment")
    parser.add_argument("--S", type=int, default=1000, help="Sweeps per chain or stage")
    parser.add_argument("--burn", type=int, default=100)
    parser.add_argument("--reps", type=int, default=10, help="Repetitions of the p >> n study")
    parser.add_argument("--p", type=int, nargs="+", default=[9, 100], help="Dimensions of the p >> n study")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--out", default=None, help="Where to write the report JSON")
    parser.set_defaults(handler=handle)


def _iqr_se(samples: np.ndarray) -> Optional[list]:
    batches = min(BATCHES, samples.shape[0] // MIN_SERIES_LENGTH)
    if batches < 2:
        return None
    return batch_means_se(samples, batches=batches).tolist()


def shrinkage(
    data: Optional[str] = None,
    kappas: Sequence[float] = SHRINKAGE_KAPPAS,
    nu: float = SHRINKAGE_NU,
    S: int = 1000,
    burn: int = 100,
    seed: int = DEFAULT_SEED,
) -> Dict:
    """Posterior spread per κ, once at fixed ν and once with ν sampled.

    Both runs anneal over the same κ stages. Spreads are interquartile
    ranges with batch-means standard errors. Without a CSV the paired-row
    surrogate is used; its irrelevant columns are reported under
    ``irrelevant``.
    """
    if data:
        dataset = load_dataset(data)
        irrelevant = []
    else:
        dataset, _ = shrinkage_surrogate(RngStream(seed))
        irrelevant = list(IRRELEVANT_COLUMNS)
    encoded = encode_binary(dataset)
    schedule = AnnealSchedule(tuple((float(k), S) for k in kappas))

    fixed = PriorSpec.build(dataset.p, dataset.intercept, 1, nu_mode=NuMode.fixed, nu_fixed=nu)
    config = SamplerConfig(rep=Representation.pdf(), prior=fixed, iterations=S, burn_in=burn, seed=seed)
    traces = anneal(schedule, config, encoded).traces

    sampled = PriorSpec.build(dataset.p, dataset.intercept, 1, nu_mode=NuMode.sample_nu)
    free = anneal(schedule, replace(config, prior=sampled, seed=seed + 1), encoded).traces
    nu_samples = [t.kept_nu[:, None] for t in free]
    nu_iqr = [float(interquartile_range(s)[0]) for s in nu_samples]
    nu_iqr_se = [se if se is None else se[0] for se in map(_iqr_se, nu_samples)]
    logging.info(f"nu interquartile range from kappa={free[0].kappa:g} to {free[-1].kappa:g}: "
                 f"{nu_iqr[0]:.3f} -> {nu_iqr[-1]:.3f}")
    return {
        "names": list(dataset.names),
        "irrelevant": irrelevant,
        "kappa": [t.kappa for t in traces],
        "mean": [t.posterior_mean().tolist() for t in traces],
        "iqr": [interquartile_range(t.kept_beta).tolist() for t in traces],
        "iqr_se": [_iqr_se(t.kept_beta) for t in traces],
        "sd_fixed_nu": traces[0].posterior_sd().tolist(),
        "sampled_nu": {
            "mean": [float(t.kept_nu.mean()) for t in free],
            "sd": [float(t.kept_nu.std(ddof=1)) for t in free],
            "iqr": nu_iqr,
            "iqr_se": nu_iqr_se,
            "iqr_ratio": nu_iqr[-1] / nu_iqr[0],
            "beta_sd": [t.posterior_sd().tolist() for t in free],
        },
    }


def _lambda_lag_one(trace: Trace, row: int) -> Optional[float]:
    if trace.lam is None:
        return None
    series = trace.lam[trace.burn_in:, row]
    if np.ptp(series) == 0:
        return 1.0
    return float(np.corrcoef(series[:-1], series[1:])[0, 1])


def slice_vs_mh(S: int = 1000, burn: int = 100, seed: int = DEFAULT_SEED, m: int = 100, trials: int = 20) -> Dict:
    """MH against slice λ updates on the binomial testbed (pdf, multiplicity encoding)."""
    dataset, _ = binomial_testbed(RngStream(seed), m, trials)
    encoded = multiplicity_encode(dataset)
    prior = PriorSpec.build(dataset.p, True, 1)
    report = {"names": list(dataset.names)}
    traces = {}
    for method in LambdaMethod:
        config = SamplerConfig(
            rep=Representation.pdf(), prior=prior, lambda_method=method, iterations=S, burn_in=burn,
            seed=seed, record_latents=True,
        )
        traces[method] = run_chain(config, encoded)
        diagnostics = diagnose_trace(traces[method])
        report[method.value] = {
            "ess": diagnostics.ess.tolist(),
            "ess_nu": diagnostics.ess_nu,
            "acceptance_rate": diagnostics.acceptance_rate,
            "wall_time": diagnostics.wall_time,
        }

    sliced = traces[LambdaMethod.slice]
    rejections = sliced.slice_rejections[sliced.burn_in:]
    stickiest = int(np.argmax(rejections.mean(axis=0)))
    report["stickiest_row"] = stickiest
    sticky = rejection_stats(rejections[:, stickiest])
    report["slice"]["rejections"] = sticky
    report["slice"]["rejections_all_rows"] = rejection_stats(rejections)
    report["lambda_lag_one"] = {m.value: _lambda_lag_one(traces[m], stickiest) for m in LambdaMethod}
    logging.info(f"Stickiest slice row {stickiest}: median {sticky['median']:g} rejections")
    return report


def mh_acceptance(
    kappas: Sequence[float] = ACCEPTANCE_KAPPAS,
    S: int = 1000,
    burn: int = 100,
    seed: int = DEFAULT_SEED,
    m: int = 100,
    trials: int = 20,
) -> Dict:
    """Acceptance rate of the MH λ update per representation, encoding and κ.

    On the flattened (binary) encoding each row has multiplicity κ; under
    the multiplicity encoding rows carry κyᵢ or κ(nᵢ−yᵢ) and the
    independence proposal accepts far less often.
    """
    dataset, _ = binomial_testbed(RngStream(seed), m, trials)
    prior = PriorSpec.build(dataset.p, True, 1)
    report = {"kappa": [float(k) for k in kappas]}
    for rep in (Representation.cdf(), Representation.pdf()):
        cells = {}
        for encoding, encoder in (("flat", flatten), ("multi", multiplicity_encode)):
            encoded = encoder(dataset)
            rates = {}
            for stage, kappa in enumerate(kappas):
                config = SamplerConfig(rep=rep, prior=prior, kappa=float(kappa), iterations=S, burn_in=burn,
                                       seed=seed + stage)
                rates[f"{kappa:g}"] = run_chain(config, encoded).acceptance_rate
            cells[encoding] = rates
            logging.info(f"{rep.kind.value}/{encoding}: acceptance {rates}")
        report[rep.kind.value] = cells
    return report


def _binomial_metrics(probabilities: np.ndarray, test_p: np.ndarray, successes: np.ndarray,
                      trials: np.ndarray) -> Dict[str, float]:
    labels = np.concatenate([np.ones(int(successes.sum())), -np.ones(int((trials - successes).sum()))])
    expanded = np.concatenate([np.repeat(probabilities, successes), np.repeat(probabilities, trials - successes)])
    return {
        "ell": expected_log_likelihood(test_p, probabilities),
        "misclassification": misclassification_rate(labels, expanded),
    }


def pggn(
    dimensions: Sequence[int] = (9, 100),
    reps: int = 10,
    S: int = 1000,
    burn: int = 100,
    map_kappa: float = 10.0,
    seed: int = DEFAULT_SEED,
) -> Dict:
    """Out-of-sample ELL and misclassification in the p ≫ n regime.

    The posterior mean comes from a κ = 1 chain; the MAP from a κ =
    ``map_kappa`` chain started at that chain's final state. For p = 9 the
    IRLS MLE is scored too, when it exists.
    """
    report = {}
    for p in dimensions:
        scores = {"posterior_mean": [], "map": [], "mle": []}
        for rep in range(reps):
            split = sparse_predictive_split(RngStream(seed).child(p, rep), p=p)
            encoded = multiplicity_encode(split.train)
            prior = PriorSpec.build(p, True, 1)
            config = SamplerConfig(rep=Representation.pdf(), prior=prior, iterations=S, burn_in=burn,
                                   seed=seed + rep)
            first = run_chain(config, encoded)
            second = run_chain(config.at_kappa(map_kappa), encoded, first.final_state, stage=1)

            test = (split.test_p, split.test_successes, split.test_trials)
            scores["posterior_mean"].append(_binomial_metrics(predict(first, split.test_X), *test))
            scores["map"].append(_binomial_metrics(predict(second.posterior_mean(), split.test_X), *test))
            if p == 9:
                try:
                    mle = irls_mle(encoded)
                    scores["mle"].append(_binomial_metrics(predict(mle, split.test_X), *test))
                except (NumericalError, LinAlgError) as e:
                    logging.warning(f"⚠️ No MLE for repetition {rep}: {e}")

        summary = {}
        for estimator, rows in scores.items():
            if not rows:
                continue
            for metric in ("ell", "misclassification"):
                values = np.array([row[metric] for row in rows])
                summary[f"{estimator}_{metric}_mean"] = float(values.mean())
                summary[f"{estimator}_{metric}_sd"] = float(values.std(ddof=1)) if values.size > 1 else 0.0
        summary["mle_available"] = len(scores["mle"])
        report[str(p)] = summary
        logging.info(f"✅ p={p}: posterior-mean ELL {summary['posterior_mean_ell_mean']:.4f}")
    return report


def mle_check(schedule: AnnealSchedule = AnnealSchedule(DEFAULT_SCHEDULE), seed: int = DEFAULT_SEED,
              burn: int = 100) -> Dict:
    """Annealed estimate without penalty against the IRLS solution."""
    dataset, _ = well_conditioned(RngStream(seed))
    encoded = encode_binary(dataset)
    prior = PriorSpec.build(dataset.p, True, penalize=False)
    config = SamplerConfig(rep=Representation.pdf(), prior=prior, burn_in=burn, seed=seed)
    estimate = anneal(schedule, config, encoded)
    oracle = irls_mle(encoded)
    error = float(np.max(np.abs(estimate.beta - oracle)) / np.max(np.abs(oracle)))
    return {
        "names": list(dataset.names),
        "annealed": estimate.beta.tolist(),
        "irls": oracle.tolist(),
        "relative_linf": error,
        "schedule": str(schedule),
    }


EXPERIMENTS = {
    "shrinkage": lambda args: shrinkage(args.data, S=args.S, burn=args.burn, seed=args.seed),
    "slice-vs-mh": lambda args: slice_vs_mh(args.S, args.burn, args.seed),
    "mh-acceptance": lambda args: mh_acceptance(S=args.S, burn=args.burn, seed=args.seed),
    "pggn": lambda args: pggn(args.p, args.reps, args.S, args.burn, seed=args.seed),
    "mle-check": lambda args: mle_check(seed=args.seed, burn=args.burn),
}


def _flatten(results: Dict, prefix: str = "") -> Dict[str, object]:
    flat = {}
    for key, value in results.items():
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{prefix}{key}."))
        elif not isinstance(value, list):
            flat[f"{prefix}{key}"] = value
    return flat


def handle(args: argparse.Namespace) -> int:
    results = EXPERIMENTS[args.name](args)
    report = ExperimentReport(name=args.name, seed=args.seed, results=results)
    out = Path(args.out) if args.out else Path("results") / f"{args.name}.json"
    write_json(report, out)
    print(get_key_value_text(f"Experiment {args.name}", _flatten(results)))
    return 0
