"""Numerical laboratory for restricting Fourier transforms of fractal measures to curves."""

from restrictlab.constants import FT_SIGN, __version__
from restrictlab.curves import CurveSpec
from restrictlab.errors import (
    AtomBudgetError,
    BumpCheckError,
    ConvergenceError,
    LabError,
    NodeFloorError,
    PreconditionError,
)

__all__ = [
    "FT_SIGN",
    "__version__",
    "CurveSpec",
    "AtomBudgetError",
    "BumpCheckError",
    "ConvergenceError",
    "LabError",
    "NodeFloorError",
    "PreconditionError",
]
