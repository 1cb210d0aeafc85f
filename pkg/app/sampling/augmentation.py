"""Likelihood latents: the truncated-normal z and the Polya-mixed scales λ.

Rows are independent given β, so every update here is vectorized over rows
and the sweep-level entry point splits rows into fixed-size blocks, each with
its own random stream. Block results do not depend on how many worker
threads process them.
"""

import logging
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from app.exceptions import DomainError, SamplerStallError, UsageError
from app.sampling.distributions import (
    normal_logcdf,
    normal_logpdf,
    sample_polya,
    sample_truncated_normal_positive,
)
from app.sampling.models import ArrayLike, LambdaMethod, Representation, SamplerConfig
from app.sampling.rng import RngStream, StreamPurpose
from config import LATENT_BLOCK_SIZE, POLYA_TRUNCATION, SLICE_MAX_REJECTIONS


@dataclass
class LikelihoodLatents:
    """Latents of all encoded rows after one sweep.

    Attributes:
        lam (numpy.ndarray): Polya scales, one per row.
        z (Optional[numpy.ndarray]): Truncated-normal latents (cdf only).
        accepted (numpy.ndarray): Accepted λ proposals per row (MH), or ones (slice).
        proposals (numpy.ndarray): λ proposals per row.
        rejections (Optional[numpy.ndarray]): Slice inner-loop rejections per row.
    """
    lam: np.ndarray
    z: Optional[np.ndarray]
    accepted: np.ndarray
    proposals: np.ndarray
    rejections: Optional[np.ndarray] = None


def draw_z(eta: ArrayLike, lam: ArrayLike, kappa: ArrayLike, rng: RngStream):
    """Draws z ~ N⁺(η + ½(1−κ)λ, λ) for the cdf representation.

    Raises:
        DomainError: If any λ is not positive.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(~(lam > 0)):
        raise DomainError("lambda must be positive")
    mean = np.asarray(eta, dtype=float) + 0.5 * (1.0 - np.asarray(kappa, dtype=float)) * lam
    return sample_truncated_normal_positive(mean, lam, rng)


def lambda_weight(eta: ArrayLike, kappa: ArrayLike, lam: ArrayLike, rep: Representation):
    """Log of the marginal weight of λ given η.

    cdf: log Φ((η + ½(1−κ)λ)/√λ), the probability that z > 0.
    pdf: log[λ^{-1/2} φ((η + ½(a−b)λ)/√λ)], the z-density at zero without
    the λ-free factor e^{aη}.
    """
    eta = np.asarray(eta, dtype=float)
    lam = np.asarray(lam, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    root = np.sqrt(lam)
    if rep.is_cdf:
        return normal_logcdf((eta + 0.5 * (1.0 - kappa) * lam) / root)
    a, b = rep.shapes(kappa)
    return normal_logpdf((eta + 0.5 * (a - b) * lam) / root) - np.log(root)


def default_thin(kappa: ArrayLike, thin: Optional[int] = None) -> np.ndarray:
    """MH steps per row: ``thin`` when given, ⌈κ′ᵢ⌉ otherwise."""
    kappa = np.atleast_1d(np.asarray(kappa, dtype=float))
    if thin is not None:
        return np.full(kappa.shape, int(thin))
    return np.maximum(1, np.ceil(kappa - 1e-12)).astype(int)


def mh_update_lambda(
    lam: ArrayLike,
    eta: ArrayLike,
    kappa: ArrayLike,
    rep: Representation,
    thin: ArrayLike,
    rng: RngStream,
    K: int = POLYA_TRUNCATION,
) -> Tuple[np.ndarray, np.ndarray]:
    """Independence Metropolis–Hastings steps for λ with Polya proposals.

    Each row i takes ``thin[i]`` steps; a proposal λ′ ~ q_{a,b} is accepted
    with probability min{1, w(λ′)/w(λ)}.

    Returns:
        Tuple[numpy.ndarray, numpy.ndarray]: New λ and accepted counts per row.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float)).copy()
    eta = np.broadcast_to(np.asarray(eta, dtype=float), lam.shape)
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), lam.shape)
    thin = np.broadcast_to(np.asarray(thin, dtype=int), lam.shape)
    a, b = rep.shapes(kappa)
    accepted = np.zeros(lam.shape, dtype=int)
    log_w = lambda_weight(eta, kappa, lam, rep)

    for step in range(int(thin.max(initial=0))):
        rows = np.flatnonzero(thin > step)
        proposal = np.atleast_1d(sample_polya(rep.polya_params(kappa[rows], K), rng))
        log_w_new = lambda_weight(eta[rows], kappa[rows], proposal, rep)
        accept = np.log(rng.generator.random(rows.size)) < log_w_new - log_w[rows]
        hit = rows[accept]
        lam[hit] = proposal[accept]
        log_w[hit] = log_w_new[accept]
        accepted[hit] += 1
    return lam, accepted


def slice_update_lambda(
    lam: ArrayLike,
    eta: ArrayLike,
    kappa: ArrayLike,
    rep: Representation,
    rng: RngStream,
    K: int = POLYA_TRUNCATION,
    max_rejections: int = SLICE_MAX_REJECTIONS,
) -> Tuple[np.ndarray, np.ndarray]:
    """Slice update of λ under the pdf representation.

    Draws u ~ U(0, w(λ)) and then proposes λ′ ~ q_{a,b} until w(λ′) > u.

    Returns:
        Tuple[numpy.ndarray, numpy.ndarray]: New λ and inner rejections per row.

    Raises:
        UsageError: With the cdf representation.
        SamplerStallError: If a row exceeds ``max_rejections``.
    """
    if rep.is_cdf:
        raise UsageError("Slice updates for lambda need the pdf representation")
    lam = np.atleast_1d(np.asarray(lam, dtype=float)).copy()
    eta = np.broadcast_to(np.asarray(eta, dtype=float), lam.shape)
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), lam.shape)
    level = lambda_weight(eta, kappa, lam, rep) + np.log(rng.generator.random(lam.shape))
    rejections = np.zeros(lam.shape, dtype=int)

    pending = np.arange(lam.size)
    while pending.size:
        proposal = np.atleast_1d(sample_polya(rep.polya_params(kappa[pending], K), rng))
        inside = lambda_weight(eta[pending], kappa[pending], proposal, rep) > level[pending]
        lam[pending[inside]] = proposal[inside]
        pending = pending[~inside]
        rejections[pending] += 1
        stalled = pending[rejections[pending] > max_rejections]
        if stalled.size:
            i = stalled[0]
            raise SamplerStallError(float(eta[i]), float(kappa[i]), int(rejections[i]))
    return lam, rejections


def _update_block(
    block: int,
    rows: slice,
    eta: np.ndarray,
    kappa: np.ndarray,
    lam: np.ndarray,
    config: SamplerConfig,
    rng: RngStream,
):
    rep = config.rep
    K = config.polya_truncation
    lambda_rng = rng.child(StreamPurpose.LAMBDA, block)
    if config.lambda_method == LambdaMethod.slice:
        new_lam, rejections = slice_update_lambda(
            lam[rows], eta[rows], kappa[rows], rep, lambda_rng, K, config.slice_max_rejections
        )
        accepted = np.ones(new_lam.shape, dtype=int)
        proposals = rejections + 1
    else:
        thin = default_thin(kappa[rows], config.thin)
        new_lam, accepted = mh_update_lambda(lam[rows], eta[rows], kappa[rows], rep, thin, lambda_rng, K)
        proposals = thin
        rejections = None
    z = None
    if rep.is_cdf:
        z = np.atleast_1d(draw_z(eta[rows], new_lam, kappa[rows], rng.child(StreamPurpose.Z, block)))
    return new_lam, z, accepted, proposals, rejections


def update_latents(
    eta: np.ndarray,
    kappa: np.ndarray,
    lam: np.ndarray,
    config: SamplerConfig,
    rng: RngStream,
    executor: Optional[Executor] = None,
) -> LikelihoodLatents:
    """Refreshes λ (and z for the cdf representation) for every encoded row.

    Args:
        eta (numpy.ndarray): Linear predictors yᵢxᵢᵀβ.
        kappa (numpy.ndarray): Row multiplicities κ′.
        lam (numpy.ndarray): Current λ.
        config (SamplerConfig): Chain settings.
        rng (RngStream): Sweep stream; blocks use its children.
        executor (Executor, optional): Pool the row blocks are mapped over.

    Returns:
        LikelihoodLatents: Updated latents and counters.
    """
    n = lam.size
    blocks = [slice(start, min(n, start + LATENT_BLOCK_SIZE)) for start in range(0, n, LATENT_BLOCK_SIZE)]
    jobs = [(i, rows, eta, kappa, lam, config, rng) for i, rows in enumerate(blocks)]
    if executor is not None and len(blocks) > 1:
        results = list(executor.map(lambda job: _update_block(*job), jobs))
    else:
        results = [_update_block(*job) for job in jobs]

    if not results:
        empty = np.zeros(0)
        return LikelihoodLatents(empty, empty if config.rep.is_cdf else None, empty.astype(int), empty.astype(int))

    new_lam = np.concatenate([r[0] for r in results])
    z = np.concatenate([r[1] for r in results]) if config.rep.is_cdf else None
    accepted = np.concatenate([r[2] for r in results])
    proposals = np.concatenate([r[3] for r in results])
    rejections = None
    if config.lambda_method == LambdaMethod.slice:
        rejections = np.concatenate([r[4] for r in results])
        logging.debug(f"Slice rejections this sweep: max={rejections.max()}, total={rejections.sum()}")
    return LikelihoodLatents(new_lam, z, accepted, proposals, rejections)
