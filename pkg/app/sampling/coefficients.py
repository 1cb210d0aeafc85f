"""Full conditional of the coefficients β.

The conditional is N(V b, V) with V⁻¹ = D + AᵀΛ⁻¹A, where A = y.X, D the
diagonal prior precision and b the representation-specific right-hand side.
Draws use perturb-then-solve: β = V(b + D^{1/2}ξ₁ + AᵀΛ^{-1/2}ξ₂). The dense
path applies V through a Cholesky factor of V⁻¹; the Woodbury path through
an n×n system. Both consume the same ξ, so their draws agree to rounding.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular

from app.data.models import EncodedData
from app.exceptions import ConditioningError, SMWInapplicableError, UsageError
from app.sampling.models import Representation, SolverKind
from app.sampling.rng import RngStream
from app.utils.constants import JITTER_START, JITTER_STOP, SMW_RATIO


@dataclass
class BetaConditional:
    """Precision V⁻¹ and mean β̃ of the coefficient conditional."""
    precision: np.ndarray
    mean: np.ndarray


def assemble_precision(data: EncodedData, lam: np.ndarray, prior_diag: np.ndarray) -> np.ndarray:
    """V⁻¹ = diag(prior_diag) + (y.X)ᵀΛ⁻¹(y.X)."""
    weighted = data.yX / lam[:, None]
    precision = data.yX.T @ weighted
    precision = 0.5 * (precision + precision.T)
    precision[np.diag_indices_from(precision)] += prior_diag
    return precision


def likelihood_rhs(data: EncodedData, lam: np.ndarray, z: Optional[np.ndarray], rep: Representation) -> np.ndarray:
    """Right-hand side b with β̃ = V b.

    cdf: (y.X)ᵀΛ⁻¹(z − ½(1−κ′)λ). pdf: (y.X)ᵀ(a − ½(a−b)), which is κ′/2 per row.

    Raises:
        UsageError: If ``z`` is missing under the cdf representation.
    """
    if rep.is_cdf:
        if z is None:
            raise UsageError("The cdf representation needs the z latents")
        return data.yX.T @ ((z - 0.5 * (1.0 - data.kappa_vec) * lam) / lam)
    a, b = rep.shapes(data.kappa_vec)
    return data.yX.T @ (a - 0.5 * (a - b))


class DirectSolver:
    """Applies V through the upper Cholesky factor of V⁻¹.

    Args:
        precision (numpy.ndarray): V⁻¹.
        root (Tuple, optional): (prior_diag, yX, lam) used for perturbations
            that match :class:`WoodburySolver`; without it perturbations come
            from the factor directly.

    Raises:
        ConditioningError: If V⁻¹ stays indefinite after the jitter ladder.
    """
    name = SolverKind.direct

    def __init__(self, precision: np.ndarray, root: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = None):
        self.precision = precision
        self.root = root
        self.factor = self._factorize(precision)

    @classmethod
    def from_latents(cls, data: EncodedData, lam: np.ndarray, prior_diag: np.ndarray) -> "DirectSolver":
        return cls(assemble_precision(data, lam, prior_diag), (prior_diag, data.yX, lam))

    @staticmethod
    def _factorize(precision: np.ndarray) -> np.ndarray:
        p = precision.shape[0]
        try:
            return cholesky(precision, lower=False)
        except LinAlgError:
            pass
        scale = np.trace(precision) / max(p, 1)
        if not np.isfinite(scale) or scale <= 0:
            raise ConditioningError("Coefficient precision has no positive diagonal to regularize")
        jitter = JITTER_START
        while jitter <= JITTER_STOP * (1 + 1e-9):
            try:
                factor = cholesky(precision + jitter * scale * np.eye(p), lower=False)
                logging.warning(f"⚠️ Coefficient precision needed jitter {jitter:.0e}·trace/p to factorize")
                return factor
            except LinAlgError:
                jitter *= 10.0
        raise ConditioningError(
            f"Coefficient precision is not positive definite even with jitter {JITTER_STOP:.0e}·trace/p"
        )

    def apply(self, rhs: np.ndarray) -> np.ndarray:
        return cho_solve((self.factor, False), rhs)

    def perturbation(self, rng: RngStream) -> np.ndarray:
        """A draw from N(0, V)."""
        if self.root is not None:
            return self.apply(root_noise(*self.root, rng))
        xi = rng.generator.standard_normal(self.precision.shape[0])
        return solve_triangular(self.factor, xi, lower=False)


class WoodburySolver:
    """Applies V = (D + AᵀΛ⁻¹A)⁻¹ with an n×n inner factorization.

    V r = D⁻¹r − D⁻¹Aᵀ(Λ + AD⁻¹Aᵀ)⁻¹AD⁻¹r.

    Raises:
        SMWInapplicableError: If some prior precision entry is not positive.
    """
    name = SolverKind.smw

    def __init__(self, data: EncodedData, lam: np.ndarray, prior_diag: np.ndarray):
        if np.any(~(prior_diag > 0)):
            raise SMWInapplicableError("The Woodbury path needs every coordinate penalized")
        self.prior_diag = prior_diag
        self.yX = data.yX
        self.lam = lam
        self.inverse_diag = 1.0 / prior_diag
        if data.n:
            inner = (self.yX * self.inverse_diag) @ self.yX.T
            inner[np.diag_indices_from(inner)] += lam
            try:
                self.inner_factor = cholesky(inner, lower=False)
            except LinAlgError as e:
                raise ConditioningError(f"Woodbury inner system is not positive definite: {e}") from e

    def apply(self, rhs: np.ndarray) -> np.ndarray:
        scaled = self.inverse_diag * rhs
        if not self.yX.shape[0]:
            return scaled
        correction = cho_solve((self.inner_factor, False), self.yX @ scaled)
        return scaled - self.inverse_diag * (self.yX.T @ correction)

    def perturbation(self, rng: RngStream) -> np.ndarray:
        return self.apply(root_noise(self.prior_diag, self.yX, self.lam, rng))


Solver = Union[DirectSolver, WoodburySolver]


def root_noise(prior_diag: np.ndarray, yX: np.ndarray, lam: np.ndarray, rng: RngStream) -> np.ndarray:
    """D^{1/2}ξ₁ + AᵀΛ^{-1/2}ξ₂, a vector with covariance V⁻¹."""
    xi_prior = rng.generator.standard_normal(prior_diag.size)
    xi_rows = rng.generator.standard_normal(lam.size)
    return np.sqrt(prior_diag) * xi_prior + yX.T @ (xi_rows / np.sqrt(lam))


def smw_apply(data: EncodedData, lam: np.ndarray, prior_diag: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """V·rhs through the Woodbury identity."""
    return WoodburySolver(data, lam, prior_diag).apply(rhs)


def make_solver(data: EncodedData, lam: np.ndarray, prior_diag: np.ndarray, kind: SolverKind = SolverKind.auto) -> Solver:
    """Builds the solver for this sweep.

    ``auto`` takes the Woodbury path when p > 2n and every coordinate is
    penalized. A requested Woodbury path falls back to the dense one when
    some prior entry is zero.
    """
    use_smw = kind == SolverKind.smw or (
        kind == SolverKind.auto and data.p > SMW_RATIO * data.n and bool(np.all(prior_diag > 0))
    )
    if use_smw:
        try:
            return WoodburySolver(data, lam, prior_diag)
        except SMWInapplicableError as e:
            logging.warning(f"⚠️ {e}; using the direct solver")
    return DirectSolver.from_latents(data, lam, prior_diag)


def conditional_mean(
    data: EncodedData,
    lam: np.ndarray,
    z: Optional[np.ndarray],
    rep: Representation,
    solver: Solver,
) -> np.ndarray:
    """β̃ = V b for the active representation."""
    return solver.apply(likelihood_rhs(data, lam, z, rep))


def draw_beta(mean: np.ndarray, solver: Solver, rng: RngStream) -> np.ndarray:
    """Exact draw from N(mean, V)."""
    return mean + solver.perturbation(rng)


def beta_conditional(
    data: EncodedData,
    lam: np.ndarray,
    z: Optional[np.ndarray],
    rep: Representation,
    prior_diag: np.ndarray,
) -> BetaConditional:
    solver = DirectSolver.from_latents(data, lam, prior_diag)
    return BetaConditional(solver.precision, conditional_mean(data, lam, z, rep, solver))
