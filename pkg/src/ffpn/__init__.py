"""Primitive normal elements whose quadratic images are primitive.

Exact counting oracles, character-sum audits, sieve-condition evaluation,
decision-table reproduction, and exhaustive resolution of candidate
exceptional pairs over characteristic-3 fields.
"""

from .errors import (
    DivisibilityViolation,
    FfpnError,
    NotPrime,
    SizeBudgetExceeded,
    UnfactoredCofactor,
    ZeroElement,
)
from .gf import FieldElement, FieldTower, build_extension
from .numtheory import FactorCache, IntFactorization, factorize, factorize_qm_minus_1, multiplicative_stats

__version__ = "0.1.0"

__all__ = [
    "FfpnError",
    "NotPrime",
    "UnfactoredCofactor",
    "SizeBudgetExceeded",
    "ZeroElement",
    "DivisibilityViolation",
    "FieldTower",
    "FieldElement",
    "build_extension",
    "FactorCache",
    "IntFactorization",
    "factorize",
    "factorize_qm_minus_1",
    "multiplicative_stats",
    "__version__",
]
