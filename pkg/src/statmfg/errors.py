"""Exception types raised by the solver."""


class MFGError(Exception):
    """Base class for all solver errors."""


class MalformedModel(MFGError):
    """A model definition references invalid indices or has bad fields."""


class InvalidParams(MFGError, ValueError):
    """Parameters of a built-in model violate their invariants."""


class DegenerateDynamics(MFGError):
    """All transition rates vanish, so the rates cannot be uniformized."""


class SingularSystem(MFGError):
    """A linear system that should be regular could not be solved."""


class ReducibleGenerator(MFGError):
    """A generator needed to be irreducible but is not.

    ``strategy`` holds the offending deterministic strategy when known.
    """

    def __init__(self, message, strategy=None):
        super().__init__(message)
        self.strategy = strategy


class InvalidCut(MFGError, ValueError):
    """The state subset for a cut is empty or the full state space."""


class Infeasible(MFGError):
    """No optimal stationary strategy makes the distribution stationary."""


class NonConvergence(MFGError):
    """An iterative solve did not converge."""
