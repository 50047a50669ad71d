"""
Compliant Informed Experts
Trade as if the market resolved on H, then share the information publicly
"""

from typing import List, Optional, Sequence

from services.agents.base_agent import AgentAction, ExpertAgent, MarketView, Policy, informed_trade
from services.chat.disclosure import Verdict, apply_disclosure, apply_silence
from services.chat.units import split_units
from services.world.space import Event, Partition, SampleSpace, cond_prob


class CompliantAgent(ExpertAgent):
    """Buys (or shorts) toward its posterior, then discloses its realized cell"""

    policy = Policy.COMPLIANT

    def act(self, view: MarketView) -> AgentAction:
        trade = informed_trade(view, self.agent_id, self.posterior(view))
        msg = self.disclose(view, self.realized_info)
        public = apply_disclosure(view.public, msg) if msg.verdict is Verdict.VERIFIED else apply_silence(view.public)
        return AgentAction(public=public, trades=[trade], messages=[msg])


class MultiUnitAgent(CompliantAgent):
    """Discloses indivisible units one at a time, one transaction before each"""

    policy = Policy.COMPLIANT_MULTIUNIT

    def __init__(
        self,
        agent_id: str,
        partition: Partition,
        space: SampleSpace,
        units: Optional[Sequence[Event]] = None,
        params=None,
    ):
        super().__init__(agent_id, partition, space, params)
        self.units: List[Event] = list(units) if units else [self.realized_info]
        # each unit U is verifiable as the cell U of {U, complement of U}
        self._unit_partitions = {u: Partition.from_info(space, u) for u in self.units}
        self._plan: Optional[List[Event]] = None

    def verification_partition(self, claim: Event) -> Partition:
        return self._unit_partitions.get(claim, self.partition)

    def act(self, view: MarketView) -> AgentAction:
        if self._plan is None:
            self._plan = split_units(view.space, view.hypothesis, self.realized_info, view.public, self.units)
        unit = self._plan.pop(0)
        target = cond_prob(view.space, view.hypothesis, view.public.omega & unit)
        trade = informed_trade(view, self.agent_id, target)
        msg = self.disclose(view, unit)
        public = apply_disclosure(view.public, msg) if msg.verdict is Verdict.VERIFIED else apply_silence(view.public)
        return AgentAction(public=public, trades=[trade], messages=[msg])

    def has_followup(self) -> bool:
        return bool(self._plan)
