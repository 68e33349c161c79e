"""Stable natural merge sorts as pluggable policies over a shared run-stack engine."""
from .errors import (AlphaOutOfRange, CostOverflow, InstrumentationViolation,
                     MergeLabError, UnknownPolicy)
from .policy import Action, Policy, StackView, make_policy, register_extension
from .engine import CostReport, RunLengths, simulate, von_neumann_cost

__version__ = "0.1.0"

__all__ = [
    "Action", "AlphaOutOfRange", "CostOverflow", "CostReport",
    "InstrumentationViolation", "MergeLabError", "Policy", "RunLengths",
    "StackView", "UnknownPolicy", "make_policy", "register_extension",
    "simulate", "von_neumann_cost",
]
