"""
Base Expert Agent Interface and Common Utilities
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, ClassVar, Dict, List, Optional

import structlog

from services.chat.disclosure import ChatMessage, PublicState, Verdict, verify_disclosure
from services.market.ledger import Ledger, TradeRecord, execute_trade
from services.market.lmsr import MarketState, clamp_price, shares_for_budget, shares_to_reach, trade_cost
from services.world.space import Event, Partition, Prob, SampleSpace, cond_prob, realized_info

logger = structlog.get_logger(__name__)


class Policy(str, Enum):
    IGNORANT_CROWD = "ignorant_crowd"
    COMPLIANT = "compliant"
    COMPLIANT_MULTIUNIT = "compliant_multiunit"
    SILENT_DEVIANT = "silent_deviant"
    MANIPULATOR = "manipulator"


COMPLIANT_POLICIES = frozenset({Policy.IGNORANT_CROWD, Policy.COMPLIANT, Policy.COMPLIANT_MULTIUNIT})


class Decision(str, Enum):
    ENTER = "ENTER"
    STAY_OUT = "STAY_OUT"


class AgentStatus(Enum):
    OUTSIDE = "outside"
    ENTERED = "entered"


@dataclass(frozen=True)
class BeliefPoint:
    """The rho of type <rho>_k: the agent's probability of theta = 1 at round k"""
    rho: Prob
    round: int


@dataclass
class MarketView:
    """Snapshot of public and market state handed to a policy"""
    space: SampleSpace
    hypothesis: Event
    public: PublicState
    market: MarketState
    ledger: Ledger
    price: Prob  # stabilized price xi_k
    tolerance: float = 0.0
    trade_fraction: float = 0.5
    price_clamp: float = 1e-12
    manipulation_distance: float = 0.2


@dataclass
class AgentAction:
    """What one policy step did: resulting public state, trades and chat"""
    public: PublicState
    trades: List[TradeRecord] = field(default_factory=list)
    messages: List[ChatMessage] = field(default_factory=list)


def differs(a: Prob, b: Prob, tolerance: float) -> bool:
    """a != b, exact when tolerance is 0"""
    if tolerance == 0:
        return a != b
    return abs(float(a) - float(b)) > tolerance


class ExpertAgent(ABC):
    """Base contract for all expert policies"""

    policy: ClassVar[Policy]

    def __init__(
        self,
        agent_id: str,
        partition: Partition,
        space: SampleSpace,
        params: Optional[Dict[str, Any]] = None,
    ):
        self.agent_id = agent_id
        self.partition = partition
        self.realized_info = realized_info(partition, space.true_index)
        self.params = params or {}
        self.status = AgentStatus.OUTSIDE

    @property
    def entered(self) -> bool:
        return self.status is AgentStatus.ENTERED

    def mark_entered(self) -> None:
        self.status = AgentStatus.ENTERED

    def is_ignorant(self, space: SampleSpace) -> bool:
        return self.realized_info == space.full

    def posterior(self, view: MarketView) -> Prob:
        """pi(H | Omega_k ∩ I_n)"""
        return cond_prob(view.space, view.hypothesis, view.public.omega & self.realized_info)

    def belief(self, view: MarketView) -> BeliefPoint:
        """The agent's type at the current round"""
        return BeliefPoint(rho=self.posterior(view), round=view.public.round)

    def entry_decision(self, view: MarketView) -> Decision:
        if differs(self.belief(view).rho, view.price, view.tolerance):
            return Decision.ENTER
        return Decision.STAY_OUT

    @abstractmethod
    def act(self, view: MarketView) -> AgentAction:
        """Trade (and possibly post to the chat) after entering"""

    def has_followup(self) -> bool:
        """True while a multi-step policy still has steps to take this round"""
        return False

    def verification_partition(self, claim: Event) -> Partition:
        return self.partition

    def disclose(self, view: MarketView, claim: Event) -> ChatMessage:
        msg = ChatMessage(sender=self.agent_id, claimed_info=claim, round=view.public.round)
        verdict = verify_disclosure(view.space, self.verification_partition(claim), msg)
        return msg.judged(verdict)

    def act_with_logging(self, view: MarketView) -> AgentAction:
        log = logger.bind(agent=self.agent_id, policy=self.policy.value, round=view.public.round)
        try:
            action = self.act(view)
        except Exception as e:
            log.warning("agent_action_failed", error_type=type(e).__name__, error=str(e))
            raise
        log.debug(
            "agent_acted",
            trades=len(action.trades),
            verified=sum(m.verdict is Verdict.VERIFIED for m in action.messages),
            rejected=sum(m.verdict is Verdict.REJECTED for m in action.messages),
        )
        return action


def entry_decision(agent: ExpertAgent, view: MarketView, epsilon: Optional[float] = None) -> Decision:
    if agent.entered:
        return Decision.STAY_OUT
    if epsilon is not None:
        view = replace(view, tolerance=epsilon)
    return agent.entry_decision(view)


def informed_trade(
    view: MarketView, agent_id: str, target: Prob, fraction: Optional[float] = None
) -> TradeRecord:
    """Trade toward `target`, spending at most a fraction of the agent's cash"""
    market, ledger = view.market, view.ledger
    account = ledger.account(agent_id)
    fraction = view.trade_fraction if fraction is None else fraction
    delta = shares_to_reach(market, clamp_price(target, view.price_clamp))
    if delta > 0:
        budget = fraction * account.cash
        if trade_cost(market, delta) > budget:
            delta = shares_for_budget(market, budget)
    elif delta < 0:
        # closing a long is free of collateral; the short part is capped by budget
        cap = max(account.position, 0.0) + fraction * min(account.cash, account.collateral_limit)
        delta = max(delta, -cap)
    return execute_trade(ledger, market, agent_id, delta)
