"""
Deviant Policies
Informed experts who trade without sharing, and a manipulator who pushes the
price without supporting information
"""

from typing import List

from services.agents.base_agent import (
    AgentAction,
    Decision,
    ExpertAgent,
    MarketView,
    Policy,
    informed_trade,
)
from services.chat.disclosure import ChatMessage, apply_silence
from services.market.lmsr import clamp_price
from services.world.space import Event


class SilentDeviantAgent(ExpertAgent):
    """Trades toward its private posterior and never discloses"""

    policy = Policy.SILENT_DEVIANT

    def act(self, view: MarketView) -> AgentAction:
        trade = informed_trade(view, self.agent_id, self.posterior(view))
        return AgentAction(public=apply_silence(view.public), trades=[trade])


class ManipulatorAgent(ExpertAgent):
    """Pushes the price a fixed distance from the stabilized price

    Always willing to enter once. Any claim it posts is false and gets
    rejected, so the public state never moves.
    """

    policy = Policy.MANIPULATOR

    def entry_decision(self, view: MarketView) -> Decision:
        return Decision.STAY_OUT if self.entered else Decision.ENTER

    def distorted_price(self, view: MarketView) -> float:
        distance = float(self.params.get("push", view.manipulation_distance))
        return float(clamp_price(float(view.price) + distance, view.price_clamp))

    def false_claims(self, view: MarketView) -> List[Event]:
        # a cell the true atom is not in, or failing that the complement of its own cell
        wrong_cells = [c for c in self.partition.cells if view.space.true_index not in c]
        if wrong_cells:
            return wrong_cells[:1]
        rest = view.space.complement(self.realized_info)
        return [rest] if len(rest) else []

    def act(self, view: MarketView) -> AgentAction:
        trade = informed_trade(view, self.agent_id, self.distorted_price(view))
        messages: List[ChatMessage] = []
        if self.params.get("false_claims", True):
            messages = [self.disclose(view, claim) for claim in self.false_claims(view)]
        return AgentAction(public=apply_silence(view.public), trades=[trade], messages=messages)
