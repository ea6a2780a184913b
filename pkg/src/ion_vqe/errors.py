"""ion-vqe error types."""

from __future__ import annotations


class VqeError(Exception):
    """Base exception for all ion-vqe errors."""

    def exit_code(self) -> int:
        """Process exit code the CLI reports for this error.

        1 for input errors (bad files, bad arguments, broken contracts),
        2 for numerical failures (no convergence, singular matrices, bad fits).
        """
        return 1


class InputError(VqeError):
    """The caller supplied something unusable."""


class FcidumpParseError(InputError):
    """Malformed integral file."""

    def __init__(self, message: str, line_number: int | None = None) -> None:
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ContractViolation(InputError):
    """An operation's precondition does not hold."""


class ParameterCountError(InputError):
    """Parameter vector length does not match the circuit or ansatz."""

    def __init__(self, expected: int, got: int) -> None:
        super().__init__(f"Expected {expected} parameters, got {got}")
        self.expected = expected
        self.got = got


class MissingBasisError(InputError):
    """No histogram supplied for a measurement basis group."""

    def __init__(self, basis_id: int) -> None:
        super().__init__(f"No histogram for basis group {basis_id}")
        self.basis_id = basis_id


class ConfigError(InputError):
    """Invalid run configuration."""


class NumericalError(VqeError):
    """A numerical routine failed."""

    def exit_code(self) -> int:
        return 2


class ConvergenceError(NumericalError):
    """Iterative solver stopped without reaching its tolerance."""

    def __init__(self, message: str, residual: float = float("nan")) -> None:
        super().__init__(f"{message} (best residual {residual:.3e})")
        self.residual = residual


class SingularConfusionError(NumericalError):
    """A qubit's SPAM confusion matrix cannot be inverted."""

    def __init__(self, qubit: int) -> None:
        super().__init__(f"Confusion matrix of qubit {qubit} is singular (eps0 + eps1 >= 1)")
        self.qubit = qubit


class FitError(NumericalError):
    """Least-squares calibration fit did not converge."""


# Map CLI exit codes to the exception class that produces them
EXIT_CODE_MAP: dict[int, type[VqeError]] = {
    1: InputError,
    2: NumericalError,
}


def error_for_exit_code(code: int, message: str) -> VqeError:
    """Create the generic exception for an exit code (the CLI parser raises its usage errors this way)."""
    exc_class = EXIT_CODE_MAP.get(code, VqeError)
    return exc_class(message)
