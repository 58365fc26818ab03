"""Exception types shared across the package."""


class SixbarError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(SixbarError, ValueError):
    """A constructor or operation received an out-of-range parameter."""


class InvalidCommandError(SixbarError, ValueError):
    """A cable/actuation command was rejected; state is unchanged."""


class InvalidPolicyError(SixbarError, ValueError):
    """Policy parameters violate the policy-kind invariants."""


class DegenerateSupportError(SixbarError, ValueError):
    """Fewer than three non-collinear contact points: no support polygon."""


class NonConvergenceError(SixbarError, RuntimeError):
    """Settling did not reach the kinetic-energy threshold in time."""


class SettlingSlipError(NonConvergenceError):
    """Settling could not converge because the robot slides down the plane."""

    def __init__(self, message, slip_distance_cm=None):
        super().__init__(message)
        self.slip_distance_cm = slip_distance_cm


class DivergenceError(SixbarError, RuntimeError):
    """A simulated body acquired a non-finite coordinate."""

    def __init__(self, message, body=None):
        super().__init__(message)
        self.body = body


class NoStepAvailableError(SixbarError, RuntimeError):
    """No actuated cable moves the projected CoM toward the requested direction."""


class ConfigError(SixbarError, ValueError):
    """Scenario configuration file is malformed or inconsistent."""
