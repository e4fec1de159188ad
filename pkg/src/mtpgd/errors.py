"""Exception and warning types raised across the package."""


class MtpgdError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(MtpgdError, ValueError):
    """Case parameters cannot produce a valid geometry or waveform."""


class InconsistentSpecError(MtpgdError, ValueError):
    """Case parameters contradict each other."""


class DegenerateElementError(MtpgdError):
    """Element Jacobian is singular or inverted."""


class UnderconstrainedError(MtpgdError):
    """Stiffness matrix is singular after Dirichlet elimination."""


class InconsistentStateError(MtpgdError, ValueError):
    """Plastic state array does not match the discretization."""


class NonFiniteStrainError(MtpgdError, FloatingPointError):
    """Strain history contains NaN or inf."""

    def __init__(self, gauss_point, time_index):
        self.gauss_point = int(gauss_point)
        self.time_index = int(time_index)
        super().__init__(
            f"non-finite strain at Gauss point {self.gauss_point}, time index {self.time_index}"
        )


class CompressionError(MtpgdError):
    """Greedy deflation stagnated before reaching the requested tolerance."""


class GridError(MtpgdError, ValueError):
    """Time grid cannot be factored into micro and macro grids."""


class StepFailureError(MtpgdError):
    """Incremental solver failed to converge at a time step."""

    def __init__(self, time_index, residual):
        self.time_index = int(time_index)
        self.residual = float(residual)
        super().__init__(
            f"step {self.time_index} did not converge (relative residual {self.residual:.3e})"
        )


class ProbeError(MtpgdError, LookupError):
    """Probe point lies outside the mesh."""


class ConfigError(MtpgdError, ValueError):
    """Malformed run configuration file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StagnationWarning(UserWarning):
    """Alternating-direction fixed point hit its sweep cap."""


class TruncationWarning(UserWarning):
    """Mode budget exhausted before the enrichment criterion was met."""
