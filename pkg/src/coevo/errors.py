"""Exception hierarchy shared by every layer."""


class CoevoError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(CoevoError, ValueError):
    """Model parameters or graph data violate a construction invariant."""


class AssumptionError(CoevoError):
    """Operation requires the parameter regime tau < gamma, kappa > sigma + alpha + 1."""


class IntegrationError(CoevoError):
    """ODE integration failed (step-size underflow, step budget, nonfinite state)."""


class InvariantViolation(IntegrationError):
    """A state left its invariant domain by more than the clamp threshold."""


class SimulationOverflow(CoevoError):
    """Impact grew past the overflow guard during a stochastic run."""
