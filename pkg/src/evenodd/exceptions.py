"""Exception hierarchy shared by every module of the package."""


class EvenOddError(Exception):
    """Base class for all package errors."""


class ConfigError(EvenOddError, ValueError):
    """Invalid model, selector or sweep configuration."""


class SymmetryError(ConfigError):
    """A coupling map violates the reflection symmetry D(l) = D(-l)."""

    def __init__(self, displacement, value, mirror_value):
        self.displacement = tuple(displacement)
        super().__init__(
            f"coupling at displacement {self.displacement} is {value!r} but its "
            f"mirror image carries {mirror_value!r}"
        )


class InstabilityError(EvenOddError, ArithmeticError):
    """The quadratic boson model has no stable ground state."""

    def __init__(self, message, k=None, margin=None):
        self.k = k
        self.margin = margin
        super().__init__(message)


class CriticalPointError(InstabilityError):
    """Spin field sits inside the refused window around B_c."""


class UnsupportedModelError(EvenOddError, ValueError):
    """The requested mapping does not apply to this coupling pattern."""


class NumericalDegeneracyError(EvenOddError, ArithmeticError):
    """A numerical self-consistency check failed (pairing, reality, residual)."""


class DomainError(EvenOddError, ValueError):
    """Argument outside the domain where a formula holds."""


class ConvergenceError(EvenOddError, ArithmeticError):
    """An iterative or truncated computation did not converge."""
