"""
Domain errors shared by every component
"""

from typing import Any, Dict, Optional


class EntangleError(Exception):
    """Base class for all simulator errors"""

    code = "entangle_error"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {"code": self.code, "message": self.message, "details": self.details}


# World model

class InvalidSpace(EntangleError):
    code = "invalid_space"


class ZeroConditioningEvent(EntangleError):
    code = "zero_conditioning_event"


class InfeasibleConstraints(EntangleError):
    code = "infeasible_constraints"


# Market engine

class TargetOutOfRange(EntangleError):
    code = "target_out_of_range"


class InsufficientFunds(EntangleError):
    code = "insufficient_funds"


class CollateralExceeded(EntangleError):
    code = "collateral_exceeded"


class MarketStillOpen(EntangleError):
    code = "market_still_open"


class AllBalancesZero(EntangleError):
    code = "all_balances_zero"


# Disclosure channel

class NotVerified(EntangleError):
    code = "not_verified"


class UnitsInconsistent(EntangleError):
    code = "units_inconsistent"


# Agents

class CrowdBudgetExhausted(EntangleError):
    code = "crowd_budget_exhausted"


# Revision lab

class DegenerateDenominator(EntangleError):
    code = "degenerate_denominator"


class DegenerateInterval(EntangleError):
    code = "degenerate_interval"


# Harness

class BadExperimentShape(EntangleError):
    code = "bad_experiment_shape"


class ParseError(EntangleError):
    code = "parse_error"


class ValidationError(EntangleError):
    code = "validation_error"
