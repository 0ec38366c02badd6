"""Exception hierarchy shared by all modules."""


class LucasUzawaError(Exception):
    """Base class for every error raised by this package."""


class InvalidParametersError(LucasUzawaError, ValueError):
    """Structural parameters violate a hard constraint."""

    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join(v.message for v in self.violations) or "invalid parameters"
        super().__init__(msg)


class DivergentIntegralError(LucasUzawaError, ArithmeticError):
    """An improper integral has a non-positive decay rate."""


class IntegrationError(LucasUzawaError, RuntimeError):
    """The ODE integrator could not complete the requested span."""

    def __init__(self, message: str, t: float):
        self.t = t
        super().__init__(f"{message} (t={t:.12g})")


class QuadratureError(LucasUzawaError, RuntimeError):
    """Adaptive quadrature failed to converge or hit a non-finite sample."""


class RootFindingError(LucasUzawaError, RuntimeError):
    """Bracketed root finding failed."""


class CalibrationError(LucasUzawaError, RuntimeError):
    """No unique admissible initial control could be determined."""

    def __init__(self, message: str, brackets=()):
        self.brackets = list(brackets)
        super().__init__(message)


class EvaluationError(LucasUzawaError, ArithmeticError):
    """A closed-form evaluator hit a singular point."""

    def __init__(self, message: str, t: float):
        self.t = t
        super().__init__(f"{message} (t={t:.12g})")


class HorizonExceededError(EvaluationError):
    """F* - F(t) fell below the floating-point floor."""


class PositivityError(IntegrationError):
    """A simulated state component left the positive orthant."""

    def __init__(self, component: str, t: float):
        self.component = component
        super().__init__(f"state component {component!r} lost positivity", t)
