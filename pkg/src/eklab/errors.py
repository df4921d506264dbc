"""Exception types shared across the package.

Numerical aborts (vacuum, instability, hyperbolicity loss) carry enough
context to locate the failure in time; structural errors (shape, dependency,
configuration) are programming/usage errors.
"""


class EKLabError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(EKLabError):
    """Operands live on different grids or have incompatible orders."""


class DimensionError(EKLabError):
    """Operation requested on a grid of unsupported dimension."""


class UnsupportedOrderError(EKLabError):
    """Derivative order exceeds what the discretization supports."""


class DomainValidityError(EKLabError):
    """A constitutive law was evaluated outside its validity interval."""

    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = nodes


class VacuumError(EKLabError):
    """Density dropped below the vacuum threshold."""

    def __init__(self, message, t=None, rho_min=None):
        super().__init__(message)
        self.t = t
        self.rho_min = rho_min


class InstabilityError(EKLabError):
    """NaN/Inf or runaway norm growth detected during time stepping."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class HyperbolicityError(EKLabError):
    """min(g'(rho), rho) fell below the admissible floor along a trajectory."""

    def __init__(self, message, t=None, partial_history=None):
        super().__init__(message)
        self.t = t
        self.partial_history = partial_history


class DependencyError(EKLabError):
    """A cascade rank was requested before its prerequisites were solved."""


class ProfileExistenceError(EKLabError):
    """No connecting orbit for the leading boundary-layer profile."""


class CoercivityError(EKLabError):
    """The layer two-point problem lost its sign condition (b <= 0)."""


class DecayError(EKLabError):
    """A layer forcing does not decay fast enough for quadrature."""


class TruncationError(EKLabError):
    """The stretched domain is too short; solution not settled at zeta_max."""


class ScaleSeparationError(EKLabError):
    """epsilon too large: the boundary layer does not fit inside the domain."""


class HistoryTooShortError(EKLabError):
    """Not enough stored snapshots for the requested time-derivative stencil."""


class ConfigError(EKLabError):
    """Malformed experiment configuration."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"line {line}" + (f", col {column}" if column else "") + f": {message}"
        super().__init__(message)
        self.line = line
        self.column = column
