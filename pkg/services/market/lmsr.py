"""
LMSR Automated Market Maker
Binary logarithmic market scoring rule over YES/NO share quantities.

Cost potential C(q) = b * ln(exp(q_yes / b) + exp(q_no / b));
the YES price is the logistic of (q_yes - q_no) / b.
"""

import math
from dataclasses import dataclass

import numpy as np

from services.errors import TargetOutOfRange, ValidationError
from services.world.space import Prob


@dataclass
class MarketState:
    """Outstanding quantities, liquidity and the logical event clock"""
    liquidity_b: float
    q_yes: float = 0.0
    q_no: float = 0.0
    tick: int = 0
    quiet_ticks: int = 0
    intake: float = 0.0  # cumulative cash paid to the market maker
    closed: bool = False

    def __post_init__(self):
        if not self.liquidity_b > 0:
            raise ValidationError(f"liquidity_b must be positive, got {self.liquidity_b}")


def lmsr_price(state: MarketState) -> float:
    x = (state.q_yes - state.q_no) / state.liquidity_b
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def lmsr_cost(state: MarketState) -> float:
    b = state.liquidity_b
    return b * float(np.logaddexp(state.q_yes / b, state.q_no / b))


def trade_cost(state: MarketState, delta: float) -> float:
    """C(q_yes + delta, q_no) - C(q_yes, q_no)"""
    if delta == 0:
        return 0.0
    b = state.liquidity_b
    after = b * float(np.logaddexp((state.q_yes + delta) / b, state.q_no / b))
    return after - lmsr_cost(state)


def shares_to_reach(state: MarketState, target: Prob) -> float:
    t = float(target)
    if not 0.0 < t < 1.0:
        raise TargetOutOfRange(f"target price {target} is outside (0, 1)", {"target": str(target)})
    return state.liquidity_b * math.log(t / (1.0 - t)) - (state.q_yes - state.q_no)


def shares_for_budget(state: MarketState, budget: float) -> float:
    """YES shares whose purchase costs exactly `budget`"""
    if budget <= 0:
        return 0.0
    b = state.liquidity_b
    p = lmsr_price(state)
    x = budget / b
    # cost(delta) = b * ln(p * exp(delta / b) + 1 - p), inverted in log space for large x
    if x <= 30.0:
        return b * math.log1p(math.expm1(x) / p)
    return b * (x + math.log1p(-(1.0 - p) * math.exp(-x)) - math.log(p))


def clamp_price(price: Prob, bound: float) -> Prob:
    if price < bound:
        return bound
    if price > 1.0 - bound:
        return 1.0 - bound
    return price


def advance_clock(state: MarketState, ticks: int = 1) -> None:
    state.tick += ticks
    state.quiet_ticks += ticks


def inactivity_closed(state: MarketState, threshold_ticks: int) -> bool:
    if threshold_ticks < 1:
        raise ValidationError("threshold_ticks must be at least 1")
    return state.quiet_ticks >= threshold_ticks


def market_maker_pnl(state: MarketState, theta: int) -> float:
    """Market-maker profit once every YES share has been paid theta"""
    # all trades are YES trades, so q_yes is the net outstanding YES position
    return state.intake - theta * state.q_yes
