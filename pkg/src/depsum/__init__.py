"""Dependent adders: sums whose index sets are elements of the carrier.

Concrete instances live in their own modules (discrete, ordinal, padic,
polyadder, continuous, fincat, fintop); ``instances`` names them and
``cli`` runs their axiom suites.
"""
from .core import (
    AXIOMS,
    AdderInstance,
    CheckResult,
    EqualityNotion,
    Family,
    FiberDescriptor,
    FlatPair,
    LeftModuleInstance,
    RightModuleInstance,
    Skip,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "AXIOMS",
    "AdderInstance",
    "CheckResult",
    "EqualityNotion",
    "Family",
    "FiberDescriptor",
    "FlatPair",
    "LeftModuleInstance",
    "RightModuleInstance",
    "Skip",
]
