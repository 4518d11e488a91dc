"""Exception hierarchy shared by every solver module."""

from __future__ import annotations


class CoordSolveError(Exception):
    """Base class for all package errors."""


class InvalidParameter(CoordSolveError, ValueError):
    """A constructor invariant failed. ``field`` names the offending parameter."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class DomainError(CoordSolveError, ValueError):
    """Argument outside the domain of an operation."""


class AssumptionViolation(CoordSolveError):
    """Demand derivative has the wrong sign at some grid point."""

    def __init__(self, q: float, s: float, derivative: str, value: float):
        super().__init__(f"{derivative}={value!r} has the wrong sign at (q={q!r}, s={s!r})")
        self.q = q
        self.s = s
        self.derivative = derivative
        self.value = value


class Degenerate(CoordSolveError):
    """Tangential, clustered or knot-located fixed point."""


class NoMultiplicity(CoordSolveError):
    """The fixed points do not form the low/unstable/high pattern."""

    def __init__(self, n_stable: int, pattern: list[str]):
        super().__init__(f"NoMultiplicity({n_stable}): observed pattern {pattern}")
        self.n_stable = n_stable
        self.pattern = pattern


class InternalInconsistency(CoordSolveError):
    """A structural assertion failed; the equilibrium structure is mis-validated."""


class NonConvergence(CoordSolveError):
    """An iterative routine exhausted its budget."""

    def __init__(self, message: str, last: tuple[float, ...] = ()):
        super().__init__(message)
        self.last = last


class CertificateFailure(CoordSolveError):
    """A deviation beats the leader's solution."""

    def __init__(self, s_l: float, realization: float, margin: float):
        super().__init__(
            f"deviation s_l={s_l!r} with continuation {realization!r} beats the solution by {-margin!r}"
        )
        self.s_l = s_l
        self.realization = realization
        self.margin = margin


class OrderingViolation(CoordSolveError):
    """Welfare ordering across outcomes failed beyond tolerance."""


class ParseError(CoordSolveError):
    """Scenario document is not well-formed."""


class ScenarioValidationError(CoordSolveError):
    """Scenario document violates the schema or a model invariant."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


ValidationError = ScenarioValidationError
