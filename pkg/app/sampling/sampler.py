"""Gibbs chains, annealing over κ and the point estimators built on them."""

import logging
import time
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import replace
from typing import Optional, Tuple

import numpy as np

from app.data.encoding import powered_log_likelihood
from app.data.models import EncodedData
from app.exceptions import UsageError
from app.sampling.augmentation import LikelihoodLatents, draw_z, update_latents
from app.sampling.coefficients import conditional_mean, draw_beta, make_solver
from app.sampling.models import (
    AnnealSchedule,
    ChainState,
    EstimateKind,
    LambdaMethod,
    NuMode,
    PointEstimate,
    PriorSpec,
    SamplerConfig,
    Trace,
)
from app.sampling.prior import draw_nu, draw_nu_sq, log_prior_penalty, prior_precision, update_omega
from app.sampling.rng import RngStream, StreamPurpose


def initial_state(config: SamplerConfig, data: EncodedData, rng: RngStream) -> ChainState:
    """β = 0, ν = 1 (or its fixed value), λ = 1, ω = 1 and z drawn once at β = 0."""
    prior = config.prior
    nu = prior.nu_fixed if prior.nu_mode == NuMode.fixed else 1.0
    lam = np.ones(data.n)
    z = None
    if config.rep.is_cdf:
        z = np.atleast_1d(draw_z(np.zeros(data.n), lam, data.kappa_vec, rng.child(StreamPurpose.INIT)))
    return ChainState(np.zeros(prior.p), float(nu), lam, z, np.ones(prior.p))


def _nu_is_sampled(prior: PriorSpec) -> bool:
    return prior.nu_mode != NuMode.fixed and prior.penalty_active


def _sweep(
    state: ChainState,
    config: SamplerConfig,
    data: EncodedData,
    rng: RngStream,
    executor: Optional[Executor] = None,
) -> Tuple[ChainState, LikelihoodLatents]:
    prior = config.prior
    kappa = config.kappa

    omega = state.omega
    if prior.alpha == 1:
        omega = update_omega(state.beta, state.nu, kappa, prior, rng.child(StreamPurpose.OMEGA))

    latents = update_latents(data.eta(state.beta), data.kappa_vec, state.lam, config, rng, executor)

    prior_diag = prior_precision(omega, state.nu, kappa, prior.alpha, prior.sigma)
    solver = make_solver(data, latents.lam, prior_diag, config.solver)
    mean = conditional_mean(data, latents.lam, latents.z, config.rep, solver)
    beta = draw_beta(mean, solver, rng.child(StreamPurpose.BETA))

    nu = state.nu
    if _nu_is_sampled(prior):
        nu_rng = rng.child(StreamPurpose.NU)
        if prior.alpha == 2 or prior.nu_mode == NuMode.sample_nu_sq:
            nu = draw_nu_sq(beta, omega, kappa, prior, nu_rng)
        else:
            nu = draw_nu(beta, kappa, prior, nu_rng)

    return ChainState(beta, nu, latents.lam, latents.z, omega), latents


def gibbs_step(
    state: ChainState,
    config: SamplerConfig,
    data: EncodedData,
    rng: RngStream,
    executor: Optional[Executor] = None,
) -> ChainState:
    """One sweep in the order ω → λ → z → β → ν.

    ω is drawn for the lasso only, z for the cdf representation only, and ν
    is left unchanged when fixed or when no coordinate is penalized.
    ``data`` must already carry the multiplicities of ``config.kappa``.
    """
    return _sweep(state, config, data, rng, executor)[0]


def _validate(config: SamplerConfig, data: EncodedData) -> None:
    if data.p != config.prior.p:
        raise UsageError(f"Prior covers {config.prior.p} coefficients but the data has {data.p} columns")
    if data.n == 0 and not config.allow_prior_only:
        raise UsageError("No data rows; enable prior-only mode to sample from the prior")
    config.rep.check(data.kappa_vec)
    config.prior.check(data.n)


def run_chain(
    config: SamplerConfig,
    data: EncodedData,
    state: Optional[ChainState] = None,
    stage: int = 0,
) -> Trace:
    """Runs ``config.iterations`` sweeps and records every state.

    Args:
        config (SamplerConfig): Chain settings; ``kappa`` rescales the data.
        data (EncodedData): Encoded rows at any base κ.
        state (ChainState, optional): Starting state, e.g. the final state of
            the previous annealing stage. Defaults to :func:`initial_state`.
        stage (int): Stage index; selects the random streams.

    Returns:
        Trace: Samples, counters and the final state.

    Raises:
        UsageError: On inconsistent data and configuration.
        SamplerStallError: When a slice update hits its cap.
        ConditioningError: When the coefficient precision cannot be factorized.
    """
    data = data.with_kappa(config.kappa)
    _validate(config, data)
    stage_rng = RngStream(config.seed).child(stage)

    if state is None or state.lam.size != data.n:
        fresh = initial_state(config, data, stage_rng.child(0))
        state = fresh if state is None else replace(state.copy(), lam=fresh.lam, z=fresh.z)
    else:
        state = state.copy()
    if config.prior.nu_mode == NuMode.fixed:
        state.nu = float(config.prior.nu_fixed)

    S, p, n = config.iterations, data.p, data.n
    betas = np.empty((S, p))
    nus = np.empty(S)
    accepted = np.zeros(S, dtype=int)
    proposals = np.zeros(S, dtype=int)
    rejections = np.zeros((S, n), dtype=int) if config.lambda_method == LambdaMethod.slice else None
    lams = np.empty((S, n)) if config.record_latents else None

    logging.info(
        f"Stage {stage}: kappa={config.kappa:g}, {S} sweeps ({config.burn_in} burn-in), "
        f"n={n}, p={p}, rep={config.rep.kind.value}, lambda={config.lambda_method.value}"
    )
    started = time.perf_counter()
    executor = ThreadPoolExecutor(max_workers=config.threads) if config.threads > 1 else None
    try:
        for s in range(S):
            state, latents = _sweep(state, config, data, stage_rng.child(s + 1), executor)
            betas[s] = state.beta
            nus[s] = state.nu
            accepted[s] = latents.accepted.sum()
            proposals[s] = latents.proposals.sum()
            if rejections is not None:
                rejections[s] = latents.rejections
            if lams is not None:
                lams[s] = state.lam
    finally:
        if executor is not None:
            executor.shutdown()
    wall_time = time.perf_counter() - started

    trace = Trace(
        kappa=config.kappa,
        beta=betas,
        nu=nus,
        burn_in=config.burn_in,
        lambda_accepted=accepted,
        lambda_proposals=proposals,
        slice_rejections=rejections,
        lam=lams,
        wall_time=wall_time,
        final_state=state,
    )
    logging.info(
        f"✅ Stage {stage} done in {wall_time:.2f}s, lambda acceptance {trace.acceptance_rate:.3f}"
    )
    if rejections is not None and rejections.size:
        logging.info(
            f"Slice rejections: median {np.median(rejections):.0f}, mean {rejections.mean():.1f}, max {rejections.max()}"
        )
    return trace


def _estimate_kind(prior: PriorSpec) -> EstimateKind:
    return EstimateKind.map if prior.penalty_active else EstimateKind.mle


def anneal(
    schedule: AnnealSchedule,
    config: SamplerConfig,
    data: EncodedData,
    state: Optional[ChainState] = None,
    first_stage: int = 0,
) -> PointEstimate:
    """Runs the stages of ``schedule`` back to back, each starting where the last ended.

    The estimate is the post-burn-in mean of the final stage. It is a MAP
    estimate when some coordinate is penalized and the MLE otherwise.
    """
    traces = []
    for offset, (kappa, iterations) in enumerate(schedule.stages):
        trace = run_chain(config.at_kappa(kappa, iterations), data, state, first_stage + offset)
        traces.append(trace)
        state = trace.final_state

    final = traces[-1]
    fixed = config.prior.nu_mode == NuMode.fixed
    nu = config.prior.nu_fixed if fixed else float(final.kept_nu.mean())
    return PointEstimate(final.posterior_mean(), nu, fixed, _estimate_kind(config.prior), schedule, traces)


def posterior_mean(config: SamplerConfig, data: EncodedData) -> PointEstimate:
    """Posterior mean from a single chain at κ = 1."""
    schedule = AnnealSchedule(((1.0, config.iterations),))
    estimate = anneal(schedule, config, data)
    estimate.kind = EstimateKind.posterior_mean
    return estimate


def estimate_two_stage_nu(config: SamplerConfig, data: EncodedData, schedule: AnnealSchedule) -> PointEstimate:
    """MAP at a plug-in ν.

    A κ = 1 chain with ν sampled gives ν̂ as the posterior mean of ν; the
    schedule then runs with ν fixed at ν̂, starting from that chain's final
    state.

    Raises:
        UsageError: For the ridge prior or when no coordinate is penalized.
    """
    prior = config.prior
    if prior.alpha != 1 or not prior.penalty_active:
        raise UsageError("The two-stage nu estimator needs a lasso prior with penalized coordinates")
    if prior.nu_mode == NuMode.fixed:
        prior = replace(prior, nu_mode=NuMode.sample_nu, nu_fixed=None)

    first = run_chain(replace(config, prior=prior).at_kappa(1.0), data, stage=0)
    nu_hat = float(first.kept_nu.mean())
    logging.info(f"Two-stage nu: posterior mean of nu at kappa=1 is {nu_hat:.4g}")

    second = anneal(schedule, replace(config, prior=prior.with_fixed_nu(nu_hat)), data, first.final_state, first_stage=1)
    second.traces.insert(0, first)
    return second


def log_power_posterior(beta: np.ndarray, data: EncodedData, prior: PriorSpec, nu: float, kappa: float) -> float:
    """Unnormalized log power posterior of β at fixed ν.

    Powered log-likelihood Σ −κ′ᵢ log(1 + e^{−ηᵢ}) plus the powered penalty
    of :func:`~app.sampling.prior.log_prior_penalty`.
    """
    beta = np.asarray(beta, dtype=float)
    return powered_log_likelihood(data.with_kappa(kappa), beta) + log_prior_penalty(beta, nu, kappa, prior)
