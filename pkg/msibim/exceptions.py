"""Custom exception classes."""


class SimulationError(Exception):

    """Base class for errors raised while building or advancing a state.

    :param message:
        Human readable description.
    :param step:
        Optional index of the time step in which the error occurred.

    """

    def __init__(self, message, step=None):
        super(SimulationError, self).__init__(message)
        self.step = step


class InterfaceVanishedError(SimulationError):

    """Raised when the level set has no zero crossing left.

    Terminates a run normally: all the solid has melted.

    """


class BandExceedsReachError(SimulationError):

    """Raised when the tubular band is wider than the local reach.

    Happens when ``1 - d * kappa`` is not positive at a band point.

    """


class AmbiguousProjectionError(SimulationError):

    """Raised when no opposite-sign label is found near a projection."""


class WindowTooSmallError(SimulationError):

    """Raised when the interface, its band or a mirror point leaves the
    grid box, or when more than one component touches the box."""


class TooCloseToInterfaceError(SimulationError):

    """Raised when a normal derivative is requested closer than ``h/2``
    to the interface."""


class CFLViolationError(SimulationError):

    """Raised when a time step exceeds the CFL restriction.

    :attr:`suggested_dt` holds the largest admissible step.

    """

    def __init__(self, message, suggested_dt, step=None):
        super(CFLViolationError, self).__init__(message, step=step)
        self.suggested_dt = suggested_dt


class SolverFailureError(SimulationError):

    """Raised when the linear solve does not reach the tolerance.

    :attr:`residual` holds the best relative residual reached.

    """

    def __init__(self, message, residual, step=None):
        super(SolverFailureError, self).__init__(message, step=step)
        self.residual = residual


class ConfigError(Exception):

    """Raised when a run configuration is invalid.

    :attr:`violations` lists every problem found, one message per key.

    """

    def __init__(self, violations):
        self.violations = list(violations)
        message = 'Invalid configuration: {0}'.format(
            '; '.join(self.violations))
        super(ConfigError, self).__init__(message)


class SnapshotFormatError(Exception):

    """Raised when a grid snapshot file cannot be parsed."""
