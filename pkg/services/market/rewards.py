"""
Real-asset reward mapping, proportional to final play-money balances
"""

from decimal import Decimal
from fractions import Fraction
from typing import Dict, Union

from services.errors import AllBalancesZero, ValidationError


def rewards(
    final_balances: Dict[str, float],
    pool: Union[str, float, Decimal],
    precision: Union[str, Decimal] = "0.01",
) -> Dict[str, Decimal]:
    """Split `pool` proportionally, conserving it exactly by largest remainder"""
    quantum = Decimal(str(precision))
    if quantum <= 0:
        raise ValidationError("reward precision must be positive", {"precision": str(quantum)})
    pool_d = Decimal(str(pool))
    if pool_d < 0:
        raise ValidationError("reward pool must be nonnegative")
    if pool_d % quantum != 0:
        raise ValidationError(
            "reward pool is not a whole number of precision quanta",
            {"pool": str(pool_d), "precision": str(quantum)},
        )

    weights = {k: Fraction(max(0.0, float(v))) for k, v in final_balances.items()}
    total = sum(weights.values(), Fraction(0))
    if total <= 0:
        raise AllBalancesZero("no agent ends with a positive balance")

    units = int(pool_d / quantum)
    exact = {k: units * w / total for k, w in weights.items()}
    floors = {k: int(v) for k, v in exact.items()}
    leftover = units - sum(floors.values())

    # ties keep insertion order
    by_remainder = sorted(exact, key=lambda k: exact[k] - floors[k], reverse=True)
    for k in by_remainder[:leftover]:
        floors[k] += 1

    return {k: floors[k] * quantum for k in final_balances}
