"""
Ignorant Crowd
The aggregate of experts holding only public information. Its behavioral
law: move the price to pi(H | Omega_k), at once or a bounded fraction per tick.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List

import structlog

from services.agents.base_agent import AgentAction, ExpertAgent, MarketView, Decision, Policy
from services.chat.disclosure import PublicState, apply_silence
from services.errors import CollateralExceeded, CrowdBudgetExhausted, InsufficientFunds
from services.market.ledger import Ledger, TradeRecord, execute_trade
from services.market.lmsr import (
    MarketState,
    advance_clock,
    clamp_price,
    lmsr_price,
    shares_for_budget,
    shares_to_reach,
)
from services.world.space import Event, Prob, SampleSpace, cond_prob

logger = structlog.get_logger(__name__)

CROWD_ID = "crowd"

# share quantities below this are treated as "already at target"
SHARE_TOLERANCE = 1e-9


class StabilizationKind(str, Enum):
    INSTANT = "instant"
    TICKED = "ticked"


@dataclass(frozen=True)
class StabilizationMode:
    kind: StabilizationKind = StabilizationKind.INSTANT
    rate: float = 0.2
    convergence_epsilon: float = 1e-6
    max_ticks: int = 10_000


@dataclass
class CrowdStepResult:
    trades: List[TradeRecord] = field(default_factory=list)
    trajectory: List[float] = field(default_factory=list)
    converged: bool = True


class IgnorantAgent(ExpertAgent):
    """A listed expert with I_n = Omega; trades only as part of the crowd"""

    policy = Policy.IGNORANT_CROWD

    def entry_decision(self, view: MarketView) -> Decision:
        return Decision.STAY_OUT

    def act(self, view: MarketView) -> AgentAction:
        return AgentAction(public=apply_silence(view.public))


def crowd_target(public: PublicState, space: SampleSpace, h: Event) -> Prob:
    return cond_prob(space, h, public.omega)


def _feasible_extreme(ledger: Ledger, market: MarketState, crowd_id: str, delta: float) -> float:
    account = ledger.account(crowd_id)
    if delta > 0:
        return min(delta, shares_for_budget(market, account.cash) * (1 - 1e-9))
    cap = max(account.position, 0.0) + min(account.cash, account.collateral_limit)
    return max(delta, -cap * (1 - 1e-9))


def _crowd_trade(ledger: Ledger, market: MarketState, crowd_id: str, delta: float, target: Prob) -> TradeRecord:
    try:
        return execute_trade(ledger, market, crowd_id, delta)
    except (InsufficientFunds, CollateralExceeded) as e:
        partial = execute_trade(ledger, market, crowd_id, _feasible_extreme(ledger, market, crowd_id, delta))
        raise CrowdBudgetExhausted(
            "crowd budget cannot reach the target price",
            {"target": float(target), "price": partial.price_after, "cause": e.code, "trade": partial},
        )


def crowd_step(
    ledger: Ledger,
    market: MarketState,
    target: Prob,
    mode: StabilizationMode = StabilizationMode(),
    crowd_id: str = CROWD_ID,
    price_clamp: float = 1e-12,
) -> CrowdStepResult:
    """Drive the book price to `target`"""
    account = ledger.account(crowd_id)
    if account.cash <= 0 and account.position <= 0:
        raise CrowdBudgetExhausted("crowd has no budget left", {"cash": account.cash})

    goal = float(clamp_price(target, price_clamp))
    result = CrowdStepResult()

    if mode.kind is StabilizationKind.INSTANT:
        advance_clock(market)
        delta = shares_to_reach(market, goal)
        if abs(delta) > SHARE_TOLERANCE:
            result.trades.append(_crowd_trade(ledger, market, crowd_id, delta, target))
        result.trajectory.append(lmsr_price(market))
        return result

    aim = float(target)
    price = lmsr_price(market)
    if abs(price - aim) < mode.convergence_epsilon:
        advance_clock(market)
        result.trajectory.append(price)
        return result

    for _ in range(mode.max_ticks):
        advance_clock(market)
        step_price = price + mode.rate * (goal - price)
        result.trades.append(
            _crowd_trade(ledger, market, crowd_id, shares_to_reach(market, step_price), target)
        )
        price = lmsr_price(market)
        result.trajectory.append(price)
        if abs(price - aim) < mode.convergence_epsilon:
            return result

    result.converged = False
    logger.warning("crowd_not_converged", target=aim, price=price, ticks=mode.max_ticks)
    return result
