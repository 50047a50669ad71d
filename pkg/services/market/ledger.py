"""
Play-Money Ledger
Equal endowments, budget and collateral checks, and trade execution against
the market maker
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import structlog

from services.errors import CollateralExceeded, InsufficientFunds, ValidationError
from services.market.lmsr import MarketState, lmsr_price, trade_cost

logger = structlog.get_logger(__name__)

# float slack for budget comparisons after a cost round trip
BUDGET_SLACK = 1e-9


@dataclass
class Account:
    cash: float
    position: float = 0.0
    collateral_limit: float = 0.0
    members: int = 1

    @property
    def short_liability(self) -> float:
        return max(0.0, -self.position)


@dataclass
class TradeRecord:
    agent: str
    delta: float
    cost: float
    price_before: float
    price_after: float
    tick: int


@dataclass
class Ledger:
    """Per-agent cash and YES positions; every account starts identical"""
    initial_endowment: float
    collateral_fraction: float = 1.0
    accounts: Dict[str, Account] = field(default_factory=dict)
    trades: List[TradeRecord] = field(default_factory=list)

    def __post_init__(self):
        if not self.initial_endowment > 0:
            raise ValidationError("initial_endowment must be positive")

    def open_account(self, agent_id: str, members: int = 1, cash: Optional[float] = None) -> Account:
        """Open an account; an aggregate account pools `members` endowments"""
        if agent_id in self.accounts:
            raise ValidationError(f"account {agent_id!r} already exists")
        if cash is None:
            cash = self.initial_endowment * members
        account = Account(
            cash=cash,
            collateral_limit=self.collateral_fraction * cash,
            members=members,
        )
        self.accounts[agent_id] = account
        return account

    def account(self, agent_id: str) -> Account:
        try:
            return self.accounts[agent_id]
        except KeyError:
            raise ValidationError(f"unknown agent {agent_id!r}")


def execute_trade(ledger: Ledger, state: MarketState, agent: str, delta: float) -> TradeRecord:
    """Trade `delta` YES shares (negative sells) at the LMSR cost difference"""
    account = ledger.account(agent)
    price_before = lmsr_price(state)
    if delta == 0:
        return TradeRecord(agent, 0.0, 0.0, price_before, price_before, state.tick)

    cost = trade_cost(state, delta)
    cash_after = account.cash - cost
    position_after = account.position + delta
    if cash_after < -BUDGET_SLACK:
        raise InsufficientFunds(
            f"{agent} cannot pay {cost:.6f} with cash {account.cash:.6f}",
            {"agent": agent, "cost": cost, "cash": account.cash},
        )
    liability = max(0.0, -position_after)
    if liability > cash_after + BUDGET_SLACK or liability > account.collateral_limit + BUDGET_SLACK:
        raise CollateralExceeded(
            f"{agent} short liability {liability:.6f} exceeds collateral",
            {"agent": agent, "liability": liability, "cash_after": cash_after,
             "limit": account.collateral_limit},
        )

    state.q_yes += delta
    state.intake += cost
    state.quiet_ticks = 0
    account.cash = cash_after
    account.position = position_after

    record = TradeRecord(agent, delta, cost, price_before, lmsr_price(state), state.tick)
    ledger.trades.append(record)
    logger.debug("trade_executed", agent=agent, delta=delta, cost=cost,
                 price_after=record.price_after, tick=state.tick)
    return record
