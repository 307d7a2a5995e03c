"""Exception hierarchy shared by all toolkit modules.

Exit-code mapping used by the command line front-end:
configuration/validation problems (ScenarioError and bad flags) exit 1,
numerical failures (NumericalError and subclasses) exit 2.
"""


class GridveilError(Exception):
    """Base class for all toolkit errors."""


class DomainError(GridveilError):
    """An input lies outside the mathematical domain of an operation."""


class NumericalError(GridveilError):
    """A computation failed: non-finite values, instability, non-convergence.

    ``context`` optionally carries the offending quantity (an abscissa, a
    spectral radius, ...) for diagnostics.
    """

    def __init__(self, message, context=None):
        super().__init__(message)
        self.context = context


class InfeasibleError(NumericalError):
    """No feasible contract/solution exists for the given parameters."""


class CalibrationError(NumericalError):
    """A fitted model violates its structural assumptions (e.g. slope <= 0)."""


class ScenarioError(GridveilError):
    """Scenario file failed validation.

    ``issues`` is a list of ``(json_pointer, message)`` pairs covering every
    problem found, not just the first.
    """

    def __init__(self, issues):
        self.issues = list(issues)
        lines = "; ".join(f"{ptr}: {msg}" for ptr, msg in self.issues)
        super().__init__(f"scenario validation failed: {lines}")
