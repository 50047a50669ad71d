"""
Policy registry: builds the agent object for each configured expert
"""

from typing import Dict, List, Type

from services.agents.base_agent import ExpertAgent, Policy
from services.agents.compliant_agent import CompliantAgent, MultiUnitAgent
from services.agents.crowd import IgnorantAgent
from services.agents.deviant_agent import ManipulatorAgent, SilentDeviantAgent
from services.errors import ValidationError
from services.world.space import Event, Partition, SampleSpace

AGENT_CLASSES: Dict[Policy, Type[ExpertAgent]] = {
    Policy.IGNORANT_CROWD: IgnorantAgent,
    Policy.COMPLIANT: CompliantAgent,
    Policy.COMPLIANT_MULTIUNIT: MultiUnitAgent,
    Policy.SILENT_DEVIANT: SilentDeviantAgent,
    Policy.MANIPULATOR: ManipulatorAgent,
}


def build_agent(
    agent_id: str,
    policy: Policy,
    partition: Partition,
    space: SampleSpace,
    units: List[Event] = (),
    params: Dict = None,
) -> ExpertAgent:
    params = {k: v for k, v in (params or {}).items() if v is not None}
    if policy is Policy.COMPLIANT_MULTIUNIT:
        return MultiUnitAgent(agent_id, partition, space, units=units or None, params=params)
    agent = AGENT_CLASSES[policy](agent_id, partition, space, params)
    if policy is Policy.IGNORANT_CROWD and not agent.is_ignorant(space):
        raise ValidationError(f"ignorant agent {agent_id!r} must hold I = Omega")
    return agent
