"""Exception types shared across the package."""


class ReachStlError(Exception):
    """Base class for all package errors."""


class DimensionError(ReachStlError):
    """Operands have inconsistent dimensions."""


class SolverError(ReachStlError):
    """A feasibility/optimization solve failed; distinct from an infeasible verdict."""


class ExprSyntaxError(ReachStlError):
    """Expression text does not match the grammar; carries line/column."""

    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ExprDomainError(ReachStlError):
    """Evaluation left the expression's domain (pole, negative sqrt argument)."""


class KinkError(ReachStlError):
    """Derivative requested at a non-differentiable point (abs/sqrt kink)."""


class FormulaError(ReachStlError):
    """Malformed formula text or an out-of-fragment construct."""


class ScheduleError(ReachStlError):
    """Schedule compilation failed (bad instantiation window, short horizon)."""


class DataError(ReachStlError):
    """Trajectory data violates a dataset invariant."""


class ConfigError(ReachStlError):
    """Scenario or CLI configuration is invalid."""
