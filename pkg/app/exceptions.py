"""Error hierarchy shared by the library and the command-line front end.

Every error carries the process exit code the CLI reports for it.
"""


class PowerLogitError(Exception):
    """Base class for all errors raised by the package.

    Attributes:
        exit_code (int): Exit status used by the command-line front end.
    """
    exit_code = 1


class UsageError(PowerLogitError):
    """Invalid flags, schedules or configuration combinations."""
    exit_code = 2


class DomainError(PowerLogitError, ValueError):
    """A distribution or numeric routine received parameters outside its domain."""
    exit_code = 2


class ImproperMixingError(DomainError):
    """The Polya mixing law was requested with a ≤ 0 or b ≤ 0."""


class IngestionError(PowerLogitError, ValueError):
    """The input table could not be turned into a dataset."""
    exit_code = 3


class NumericalError(PowerLogitError, RuntimeError):
    """Base class for failures of the numerical core."""
    exit_code = 4


class ConditioningError(NumericalError):
    """The coefficient precision matrix could not be factorized."""


class SMWInapplicableError(NumericalError):
    """The Woodbury path needs a strictly positive prior precision."""


class SamplerStallError(NumericalError):
    """The slice sampler's inner loop exceeded its rejection cap.

    Args:
        eta (float): Linear predictor of the offending row.
        kappa (float): Multiplicity of the offending row.
        rejections (int): Number of rejections when the cap was hit.
    """

    def __init__(self, eta: float, kappa: float, rejections: int):
        self.eta = eta
        self.kappa = kappa
        self.rejections = rejections
        super().__init__(
            f"Slice sampler stalled after {rejections} rejections (eta={eta:.4g}, kappa={kappa:.4g})"
        )
