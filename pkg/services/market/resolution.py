"""
Self-Resolution and Settlement
The outcome is a Bernoulli draw at the final price; contracts pay one unit
per YES share when theta = 1.
"""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import structlog

from services.errors import MarketStillOpen
from services.market.ledger import Ledger
from services.market.lmsr import MarketState, clamp_price, lmsr_price
from services.world.space import Prob

logger = structlog.get_logger(__name__)

RESOLUTION_CLAMP = 1e-12


@dataclass(frozen=True)
class ResolutionRecord:
    final_price: Prob
    theta: int
    rng_seed: int


def draw_outcome(price: Prob, seed: int) -> int:
    p = clamp_price(price, RESOLUTION_CLAMP)
    u = float(np.random.default_rng(int(seed)).random())
    return int(u < p)


def resolve(state: MarketState, seed: int, final_price: Optional[Prob] = None) -> ResolutionRecord:
    """Resolve a closed market; `final_price` defaults to the book price"""
    if not state.closed:
        raise MarketStillOpen("market must close before resolution", {"tick": state.tick})
    price = lmsr_price(state) if final_price is None else final_price
    theta = draw_outcome(price, seed)
    logger.debug("market_resolved", final_price=float(price), theta=theta, rng_seed=seed)
    return ResolutionRecord(final_price=price, theta=theta, rng_seed=int(seed))


def settle(ledger: Ledger, record: ResolutionRecord) -> Dict[str, float]:
    """Pay position * theta to every account and zero the positions"""
    balances = {}
    for agent_id, account in ledger.accounts.items():
        account.cash += account.position * record.theta
        account.position = 0.0
        balances[agent_id] = account.cash
    return balances
