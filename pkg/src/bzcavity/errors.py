"""Exception types raised by the simulator."""


class ConfigError(ValueError):
    """Invalid configuration or parameter set."""


class ConvergenceError(RuntimeError):
    """A fixed-point iteration did not converge.

    ``history`` holds the iterates so the caller can tell a slow
    convergence from a limit cycle (multistable cavity response).
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class NumericalError(RuntimeError):
    """Integrator accuracy guard tripped (norm drift, basis truncation)."""


class FitError(RuntimeError):
    """Nonlinear harmonic fit failed."""

    def __init__(self, message, initial_guess=None):
        super().__init__(message)
        self.initial_guess = initial_guess
