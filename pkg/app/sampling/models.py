"""Domain types of the sampler: configuration, chain state and outputs."""

import enum
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple, Union

import numpy as np

from app.exceptions import ImproperMixingError, UsageError
from app.utils.constants import SCHEDULE_STAGE_PATTERN
from config import POLYA_TRUNCATION, SLICE_MAX_REJECTIONS, THREADS

ArrayLike = Union[float, np.ndarray]

UNPENALIZED = math.inf


class RepresentationKind(str, enum.Enum):
    """How each logistic likelihood term is augmented."""
    cdf = "cdf"
    pdf = "pdf"


class LambdaMethod(str, enum.Enum):
    """Update used for the Polya-mixed latent scales."""
    mh = "mh"
    slice = "slice"


class NuMode(str, enum.Enum):
    """Treatment of the regularization parameter nu."""
    sample_nu = "sample_nu"
    sample_nu_sq = "sample_nu_sq"
    fixed = "fixed"


class EstimateKind(str, enum.Enum):
    """Provenance label of a point estimate."""
    posterior_mean = "posterior_mean"
    map = "map"
    mle = "mle"


class SolverKind(str, enum.Enum):
    """Linear-algebra path used for the coefficient conditional."""
    auto = "auto"
    direct = "direct"
    smw = "smw"


@dataclass(frozen=True, eq=False)
class PolyaParams:
    """Parameters of the truncated Polya mixing law q_{a,b}.

    ``a`` and ``b`` may be arrays, one entry per latent, when rows carry
    their own multiplicity.

    Attributes:
        a (float | numpy.ndarray): First shape, strictly positive.
        b (float | numpy.ndarray): Second shape, strictly positive.
        K (int): Number of exponential terms kept in the series.
        tail_correction (bool): Add the mean of the dropped terms to each draw.
    """
    a: ArrayLike
    b: ArrayLike
    K: int = POLYA_TRUNCATION
    tail_correction: bool = True

    def __post_init__(self):
        if int(self.K) < 1:
            raise UsageError(f"Polya truncation must be at least 1, got {self.K}")
        if np.any(np.asarray(self.a) <= 0) or np.any(np.asarray(self.b) <= 0):
            raise ImproperMixingError(
                "The Polya mixing density is improper unless a > 0 and b > 0"
            )


@dataclass(frozen=True)
class Representation:
    """Likelihood augmentation and its Polya shapes.

    The cdf kind always uses (a, b) = (1, κ′). The pdf kind keeps ``a`` fixed
    and sets b = κ′ − a row by row, so a + b = κ′ holds under binomial
    multiplicities and across annealing stages.

    Attributes:
        kind (RepresentationKind): cdf or pdf.
        a (float): First Polya shape (pdf kind only; 1 for cdf).
        b (Optional[float]): Explicit second shape. When set, every row must
            satisfy a + b = κ′.
    """
    kind: RepresentationKind = RepresentationKind.pdf
    a: float = 0.5
    b: Optional[float] = None

    def __post_init__(self):
        if self.kind == RepresentationKind.cdf and (self.a != 1.0 or self.b is not None):
            object.__setattr__(self, "a", 1.0)
            object.__setattr__(self, "b", None)
        if self.a <= 0:
            raise UsageError(f"Polya shape a must be positive, got {self.a}")
        if self.b is not None and self.b <= 0:
            raise UsageError(f"Polya shape b must be positive, got {self.b}")

    @classmethod
    def cdf(cls) -> "Representation":
        return cls(RepresentationKind.cdf, 1.0, None)

    @classmethod
    def pdf(cls, a: float = 0.5, b: Optional[float] = None) -> "Representation":
        return cls(RepresentationKind.pdf, a, b)

    @property
    def is_cdf(self) -> bool:
        return self.kind == RepresentationKind.cdf

    def shapes(self, kappa: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
        """Returns the per-row Polya shapes (a, b) for multiplicities ``kappa``."""
        kappa = np.asarray(kappa, dtype=float)
        if self.is_cdf:
            return np.ones_like(kappa), kappa
        return np.full_like(kappa, self.a), kappa - self.a

    def check(self, kappa: ArrayLike) -> None:
        """Validates the shapes against row multiplicities.

        Raises:
            UsageError: If some row would get b ≤ 0, or an explicit b does not
                satisfy a + b = κ′.
        """
        kappa = np.asarray(kappa, dtype=float)
        if self.is_cdf:
            return
        if np.any(kappa <= self.a):
            raise UsageError(
                f"pdf representation with a={self.a} needs every multiplicity above {self.a}, "
                f"smallest is {kappa.min():.4g}"
            )
        if self.b is not None and not np.allclose(kappa, self.a + self.b):
            raise UsageError(f"pdf shapes a={self.a}, b={self.b} do not add up to the multiplicity")

    def polya_params(self, kappa: ArrayLike, K: int) -> PolyaParams:
        a, b = self.shapes(kappa)
        return PolyaParams(a, b, K)


@dataclass(frozen=True, eq=False)
class PriorSpec:
    """Regularization prior.

    Attributes:
        alpha (int): 1 for the lasso, 2 for the ridge.
        r (float): Inverse-gamma shape of the nu hyperprior at κ = 1.
        d (float): Inverse-gamma scale of the nu hyperprior at κ = 1.
        nu_mode (NuMode): Whether nu (or nu squared) is sampled or fixed.
        nu_fixed (Optional[float]): Value of nu when ``nu_mode`` is fixed.
        sigma (numpy.ndarray): Per-coordinate penalty scales; ``UNPENALIZED``
            (infinity) marks coordinates without penalty.
    """
    sigma: np.ndarray
    alpha: int = 1
    r: float = 2.0
    d: float = 0.1
    nu_mode: NuMode = NuMode.sample_nu
    nu_fixed: Optional[float] = None

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=float).copy()
        object.__setattr__(self, "sigma", sigma)
        if self.alpha not in (1, 2):
            raise UsageError(f"alpha must be 1 or 2, got {self.alpha}")
        if self.r <= 0 or self.d <= 0:
            raise UsageError(f"Hyperprior (r, d) must be positive, got ({self.r}, {self.d})")
        if np.any(sigma <= 0):
            raise UsageError("Penalty scales must be positive")
        if self.nu_mode == NuMode.fixed:
            if self.nu_fixed is None or self.nu_fixed <= 0:
                raise UsageError(f"Fixed nu must be positive, got {self.nu_fixed}")

    @classmethod
    def build(
        cls,
        p: int,
        intercept: bool = True,
        alpha: int = 1,
        r: float = 2.0,
        d: float = 0.1,
        nu_mode: NuMode = NuMode.sample_nu,
        nu_fixed: Optional[float] = None,
        penalize: bool = True,
    ) -> "PriorSpec":
        """Unit penalty scales with the intercept (column 0) left unpenalized.

        With ``penalize=False`` every coordinate is unpenalized (MLE mode).
        """
        sigma = np.ones(p)
        if intercept and p > 0:
            sigma[0] = UNPENALIZED
        if not penalize:
            sigma[:] = UNPENALIZED
        return cls(sigma, alpha, r, d, nu_mode, nu_fixed)

    @property
    def p(self) -> int:
        return self.sigma.size

    @property
    def penalized(self) -> np.ndarray:
        return np.isfinite(self.sigma)

    @property
    def n_penalized(self) -> int:
        return int(self.penalized.sum())

    @property
    def penalty_active(self) -> bool:
        return self.n_penalized > 0

    def r_kappa(self, kappa: float) -> float:
        return kappa * (self.r + 1.0) - 1.0

    def d_kappa(self, kappa: float) -> float:
        return kappa * self.d

    def check(self, n: int) -> None:
        """At least max(0, p − n) coordinates must stay penalized."""
        needed = max(0, self.p - n)
        if self.n_penalized < needed:
            raise UsageError(
                f"{self.n_penalized} penalized coordinates, at least {needed} needed for p={self.p}, n={n}"
            )

    def with_fixed_nu(self, nu: float) -> "PriorSpec":
        return replace(self, nu_mode=NuMode.fixed, nu_fixed=float(nu))


@dataclass(frozen=True, eq=False)
class SamplerConfig:
    """Settings of one Gibbs chain.

    Attributes:
        kappa (float): Base multiplicity.
        rep (Representation): Likelihood augmentation.
        prior (PriorSpec): Regularization prior.
        lambda_method (LambdaMethod): MH or slice updates for λ.
        iterations (int): Total sweeps S, burn-in included.
        burn_in (int): Leading sweeps flagged as burn-in.
        polya_truncation (int): K, terms kept in Polya draws.
        seed (int): Root seed of every random stream.
        thin (Optional[int]): MH steps per sweep; None means ⌈κ′ᵢ⌉ per row.
        threads (int): Worker threads for latent updates.
        solver (SolverKind): Coefficient solver selection.
        slice_max_rejections (int): Inner-loop cap of the slice update.
        allow_prior_only (bool): Permit a chain without data rows.
        record_latents (bool): Keep λ samples in the trace.
    """
    rep: Representation
    prior: PriorSpec
    kappa: float = 1.0
    lambda_method: LambdaMethod = LambdaMethod.mh
    iterations: int = 1000
    burn_in: int = 100
    polya_truncation: int = POLYA_TRUNCATION
    seed: int = 0
    thin: Optional[int] = None
    threads: int = THREADS
    solver: SolverKind = SolverKind.auto
    slice_max_rejections: int = SLICE_MAX_REJECTIONS
    allow_prior_only: bool = False
    record_latents: bool = False

    def __post_init__(self):
        if self.kappa <= 0:
            raise UsageError(f"kappa must be positive, got {self.kappa}")
        if self.iterations < 1 or not 0 <= self.burn_in < self.iterations:
            raise UsageError(
                f"Need 0 <= burn_in < iterations, got burn_in={self.burn_in}, iterations={self.iterations}"
            )
        if self.thin is not None and self.thin < 1:
            raise UsageError(f"thin must be at least 1, got {self.thin}")
        if self.threads < 1:
            raise UsageError(f"threads must be at least 1, got {self.threads}")
        if self.lambda_method == LambdaMethod.slice and self.rep.is_cdf:
            raise UsageError("Slice updates for lambda are only available with the pdf representation")
        if not self.rep.is_cdf and self.kappa <= self.rep.a:
            raise UsageError(f"pdf representation with a={self.rep.a} requires kappa > {self.rep.a}")

    @property
    def alpha(self) -> int:
        return self.prior.alpha

    def at_kappa(self, kappa: float, iterations: Optional[int] = None) -> "SamplerConfig":
        """Copy for one annealing stage; burn-in is capped below the stage length."""
        iterations = iterations or self.iterations
        return replace(self, kappa=float(kappa), iterations=iterations, burn_in=min(self.burn_in, iterations - 1))


@dataclass
class ChainState:
    """Full augmented state of the Markov chain.

    Attributes:
        beta (numpy.ndarray): Coefficients, length p.
        nu (float): Regularization parameter.
        lam (numpy.ndarray): Latent Polya scales, one per encoded row.
        z (Optional[numpy.ndarray]): Truncated-normal latents (cdf only).
        omega (numpy.ndarray): Prior mixing scales, length p.
    """
    beta: np.ndarray
    nu: float
    lam: np.ndarray
    z: Optional[np.ndarray]
    omega: np.ndarray

    def copy(self) -> "ChainState":
        return ChainState(
            self.beta.copy(),
            float(self.nu),
            self.lam.copy(),
            None if self.z is None else self.z.copy(),
            self.omega.copy(),
        )


@dataclass(frozen=True)
class AnnealSchedule:
    """Nondecreasing sequence of (κ, iterations) stages."""
    stages: Tuple[Tuple[float, int], ...]

    def __post_init__(self):
        if not self.stages:
            raise UsageError("Annealing schedule has no stages")
        previous = 0.0
        for kappa, iterations in self.stages:
            if kappa <= 0 or iterations < 1:
                raise UsageError(f"Invalid stage ({kappa}, {iterations})")
            if kappa < previous:
                raise UsageError("Annealing schedule must be nondecreasing in kappa")
            previous = kappa

    @classmethod
    def parse(cls, text: str) -> "AnnealSchedule":
        """Parses ``"1:500,5:500,10:500,20:500"``.

        Raises:
            UsageError: On malformed tokens or decreasing κ.
        """
        stages = []
        for token in text.split(","):
            match = SCHEDULE_STAGE_PATTERN.match(token)
            if not match:
                raise UsageError(f"Malformed schedule stage '{token}', expected kappa:iterations")
            stages.append((float(match.group(1)), int(match.group(2))))
        return cls(tuple(stages))

    def __str__(self) -> str:
        return ",".join(f"{kappa:g}:{iterations}" for kappa, iterations in self.stages)


@dataclass
class Trace:
    """Samples of one chain (one annealing stage).

    Attributes:
        kappa (float): Multiplicity the chain ran at.
        beta (numpy.ndarray): S×p coefficient samples, burn-in included.
        nu (numpy.ndarray): S samples of nu.
        burn_in (int): Number of leading samples flagged as burn-in.
        lambda_accepted (numpy.ndarray): Accepted λ proposals per sweep.
        lambda_proposals (numpy.ndarray): λ proposals per sweep.
        slice_rejections (Optional[numpy.ndarray]): S×n inner-loop rejection
            counts when the slice update is used.
        lam (Optional[numpy.ndarray]): S×n λ samples when recording latents.
        wall_time (float): Seconds spent in the chain.
        final_state (Optional[ChainState]): State after the last sweep.
    """
    kappa: float
    beta: np.ndarray
    nu: np.ndarray
    burn_in: int
    lambda_accepted: np.ndarray
    lambda_proposals: np.ndarray
    slice_rejections: Optional[np.ndarray] = None
    lam: Optional[np.ndarray] = None
    wall_time: float = 0.0
    final_state: Optional[ChainState] = None

    @property
    def iterations(self) -> int:
        return self.beta.shape[0]

    @property
    def kept_beta(self) -> np.ndarray:
        return self.beta[self.burn_in:]

    @property
    def kept_nu(self) -> np.ndarray:
        return self.nu[self.burn_in:]

    @property
    def burn_in_mask(self) -> np.ndarray:
        mask = np.zeros(self.iterations, dtype=bool)
        mask[:self.burn_in] = True
        return mask

    @property
    def acceptance_rate(self) -> float:
        proposals = self.lambda_proposals.sum()
        return float(self.lambda_accepted.sum() / proposals) if proposals else 1.0

    def posterior_mean(self) -> np.ndarray:
        return self.kept_beta.mean(axis=0)

    def posterior_sd(self) -> np.ndarray:
        return self.kept_beta.std(axis=0, ddof=1)


@dataclass
class PointEstimate:
    """Coefficient estimate with provenance.

    Attributes:
        beta (numpy.ndarray): Estimate in the scaled (internal) units.
        nu (Optional[float]): Mean of nu in the final stage, or the fixed value.
        nu_fixed (bool): Whether nu was held fixed in the final stage.
        kind (EstimateKind): posterior_mean, map or mle.
        schedule (AnnealSchedule): Stages used to produce the estimate.
        traces (List[Trace]): One trace per stage.
    """
    beta: np.ndarray
    nu: Optional[float]
    nu_fixed: bool
    kind: EstimateKind
    schedule: AnnealSchedule
    traces: List[Trace] = field(default_factory=list)
