"""Exception types shared across the package."""


class SolvmaxError(Exception):
    """Base class for all errors raised by this package."""


class NotRegular(SolvmaxError, ValueError):
    """theta has det(theta) * tr(theta) == 0 within tolerance."""


class NotBracketGenerating(SolvmaxError, ValueError):
    """omega(theta eta, eta) vanishes: the distribution is a subalgebra."""


class DegenerateFrame(SolvmaxError, ValueError):
    """{xi, theta xi} is not a basis of R^2."""


class StepFailure(SolvmaxError, RuntimeError):
    """The integrator step size underflowed."""

    def __init__(self, message: str, t_reached: float):
        super().__init__(f"{message} (reached t={t_reached!r})")
        self.t_reached = t_reached


class StateOverflow(SolvmaxError, OverflowError):
    """The state norm exceeded the configured bound."""

    def __init__(self, norm: float, t_reached: float):
        super().__init__(f"state norm {norm:.3g} exceeded bound at t={t_reached!r}")
        self.norm = norm
        self.t_reached = t_reached


class ConnectionNotFound(SolvmaxError, RuntimeError):
    """A separatrix trace left its expected strip before reaching the section."""


class EquilibriumInput(SolvmaxError, ValueError):
    """An operation that needs a moving solution received an equilibrium."""


class NotACrossing(SolvmaxError, ValueError):
    """The supplied time is not in the crossing set A(lambda)."""


class PreconditionOnLine(SolvmaxError, ValueError):
    """The initial angle lies on one of the lines phi = +-pi/2."""


class ReconstructionFailure(SolvmaxError, RuntimeError):
    """The linear conditions used to recover the covector p are dependent."""


class ConfigError(SolvmaxError, ValueError):
    """Invalid configuration document."""
