"""Explicit generating function of the formal symplectic groupoid for
polynomial Poisson structures on R^d, with the combinatorial and numerical
machinery needed to check it order by order."""

__version__ = "0.1.0"

from .errors import (
    CapExceededError,
    DegreeCapError,
    MissingWeightError,
    PoissonInputError,
    WeightTableError,
)
from .uncertainty import Measured

__all__ = [
    "__version__",
    "CapExceededError",
    "DegreeCapError",
    "MissingWeightError",
    "PoissonInputError",
    "WeightTableError",
    "Measured",
]
