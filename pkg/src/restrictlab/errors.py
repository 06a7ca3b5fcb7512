"""Exception hierarchy shared by every module."""

from __future__ import annotations


class LabError(Exception):
    """Base class for all errors raised by the package."""


class PreconditionError(LabError, ValueError):
    """An operation was called with arguments outside its contract."""


class AtomBudgetError(LabError):
    """A construction would materialize more atoms than allowed."""

    def __init__(self, requested: int, budget: int):
        super().__init__(f"{requested} atoms requested, budget is {budget}")
        self.requested = requested
        self.budget = budget


class ConvergenceError(LabError):
    """A quadrature did not reach its tolerance within its budget."""


class NodeFloorError(PreconditionError):
    """Too few quadrature nodes to resolve the integrand's oscillation."""

    def __init__(self, given: int, required: int):
        super().__init__(f"quad_nodes={given} is below the required minimum {required}")
        self.given = given
        self.required = required


class BumpCheckError(LabError):
    """The bump's Fourier transform misses its lower bound on D by more than the allowed factor."""
