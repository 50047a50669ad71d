"""
Scenario configuration schemas
"""

import hashlib
import json
from decimal import Decimal, InvalidOperation
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from services.agents.base_agent import COMPLIANT_POLICIES, Policy
from services.agents.crowd import CROWD_ID, StabilizationKind, StabilizationMode
from services.errors import InvalidSpace
from services.harness.config import settings
from services.world.space import Event, Partition, SampleSpace


class SpaceSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    atoms: List[str]
    weights: List[Union[str, float]]
    true_atom: str
    sample_true_atom: bool = False


class ExpertSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    id: str
    partition: Optional[List[List[str]]] = None
    info: Optional[List[str]] = None
    policy: Policy = Policy.COMPLIANT
    units: Optional[List[List[str]]] = None
    push: Optional[float] = None
    false_claims: bool = True

    @model_validator(mode="after")
    def _one_information_source(self):
        if (self.partition is None) == (self.info is None):
            raise ValueError(f"expert {self.id!r}: give exactly one of partition or info")
        if self.id == CROWD_ID:
            raise ValueError(f"expert id {CROWD_ID!r} is reserved for the aggregate crowd")
        return self


class MarketSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    liquidity_b: float = Field(default_factory=lambda: settings.liquidity_b, gt=0)
    endowment: float = Field(default_factory=lambda: settings.endowment, gt=0)
    crowd_size: int = Field(default_factory=lambda: settings.crowd_size, ge=1)
    inactivity_threshold: int = Field(default_factory=lambda: settings.inactivity_threshold, ge=1)
    mode: Literal["instant", "ticked"] = Field(default_factory=lambda: settings.mode)
    tick_rate: float = Field(default_factory=lambda: settings.tick_rate, gt=0, le=1)
    collateral_fraction: float = Field(default_factory=lambda: settings.collateral_fraction, gt=0)
    price_clamp: float = Field(default_factory=lambda: settings.price_clamp, gt=0, lt=0.5)
    trade_fraction: float = Field(default_factory=lambda: settings.trade_fraction, gt=0, le=1)
    manipulation_distance: float = Field(default_factory=lambda: settings.manipulation_distance)


class NumericsSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    epsilon: float = Field(default_factory=lambda: settings.epsilon, ge=0)
    rational: bool = Field(default_factory=lambda: settings.rational)
    convergence_epsilon: float = Field(default_factory=lambda: settings.convergence_epsilon, gt=0)
    max_ticks_per_round: int = Field(default_factory=lambda: settings.max_ticks_per_round, ge=1)


class RunSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = Field(default=0, ge=0)
    entry_order: Literal["random", "fifo"] = Field(default_factory=lambda: settings.entry_order)
    reward_pool: str = Field(default_factory=lambda: settings.reward_pool)
    reward_precision: str = Field(default_factory=lambda: settings.reward_precision)

    @model_validator(mode="after")
    def _pool_fits_precision(self):
        try:
            pool, quantum = Decimal(self.reward_pool), Decimal(self.reward_precision)
        except InvalidOperation:
            raise ValueError("reward_pool and reward_precision must be decimal strings")
        if quantum <= 0 or pool < 0 or pool % quantum != 0:
            raise ValueError(
                f"reward_pool {self.reward_pool} is not a nonnegative multiple of {self.reward_precision}"
            )
        return self


class ScenarioConstraints(BaseModel):
    """Knobs for the random scenario generator"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    direct_arguments: bool = False
    min_informed: int = Field(default=0, ge=0)
    max_cells: int = Field(default=4, ge=2)
    policy: Policy = Policy.COMPLIANT
    rational: bool = True
    mode: Literal["instant", "ticked"] = "instant"
    sample_true_atom: bool = False


class ScenarioConfig(BaseModel):
    """A complete, validated experiment input"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = "scenario"
    hypothesis: List[str]
    space: SpaceSpec
    experts: List[ExpertSpec] = Field(default_factory=list)
    market: MarketSpec = Field(default_factory=MarketSpec)
    numerics: NumericsSpec = Field(default_factory=NumericsSpec)
    run: RunSpec = Field(default_factory=RunSpec)

    @model_validator(mode="after")
    def _world_invariants(self):
        try:
            space = self.build_space()
            self.hypothesis_event(space)
            ids = [e.id for e in self.experts]
            if len(set(ids)) != len(ids):
                raise InvalidSpace("expert ids are not unique", {"invariant": "unique_experts"})
            for expert in self.experts:
                info = self.expert_partition(expert, space).cell_of(space.true_index)
                for unit in self.expert_units(expert, space):
                    if space.true_index not in unit:
                        raise InvalidSpace(f"expert {expert.id!r} has a unit without the true atom",
                                           {"invariant": "unit_contains_true_atom"})
                if expert.policy is Policy.IGNORANT_CROWD and info != space.full:
                    raise InvalidSpace(f"ignorant expert {expert.id!r} holds private information",
                                       {"invariant": "ignorant_info_is_omega"})
        except InvalidSpace as e:
            invariant = e.details.get("invariant", e.code)
            raise ValueError(f"{invariant}: {e.message}")
        return self

    def build_space(self, true_atom: Optional[str] = None) -> SampleSpace:
        return SampleSpace.build(
            self.space.atoms,
            self.space.weights,
            true_atom or self.space.true_atom,
            rational=self.numerics.rational,
        )

    def hypothesis_event(self, space: SampleSpace) -> Event:
        return space.event(self.hypothesis)

    def expert_partition(self, expert: ExpertSpec, space: SampleSpace) -> Partition:
        if expert.partition is not None:
            return Partition.build(space, (space.event(cell) for cell in expert.partition))
        return Partition.from_info(space, space.event(expert.info))

    def expert_units(self, expert: ExpertSpec, space: SampleSpace) -> List[Event]:
        return [space.event(u) for u in expert.units or []]

    @property
    def fully_compliant(self) -> bool:
        return all(e.policy in COMPLIANT_POLICIES for e in self.experts)

    @property
    def tolerance(self) -> float:
        """Tolerance for price/posterior comparisons in this scenario's runs"""
        if self.market.mode == StabilizationKind.TICKED.value:
            return max(self.numerics.epsilon, self.numerics.convergence_epsilon)
        if self.numerics.rational:
            return 0.0
        return self.numerics.epsilon

    def stabilization_mode(self) -> StabilizationMode:
        return StabilizationMode(
            kind=StabilizationKind(self.market.mode),
            rate=self.market.tick_rate,
            convergence_epsilon=self.numerics.convergence_epsilon,
            max_ticks=self.numerics.max_ticks_per_round,
        )

    def fingerprint(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def with_overrides(self, **sections: Dict[str, Any]) -> "ScenarioConfig":
        """Copy with per-section field overrides, e.g. market={"mode": "ticked"}"""
        data = self.model_dump(mode="json")
        for section, values in sections.items():
            if isinstance(data.get(section), dict):
                data[section] = {**data[section], **values}
            else:
                data[section] = values
        return ScenarioConfig.model_validate(data)
