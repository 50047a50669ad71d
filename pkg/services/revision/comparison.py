"""
Market versus revision: the pooled price the market reaches against the
consensus each announcement regime settles on
"""

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, Optional

import structlog

from services.engine.protocol import run_market
from services.errors import DegenerateDenominator
from services.harness.schemas.scenario import (
    ExpertSpec,
    NumericsSpec,
    RunSpec,
    ScenarioConfig,
    SpaceSpec,
)
from services.revision.consensus import (
    OverlapModel,
    RevisionScenario,
    consensus_disjoint,
    revise,
)
from services.world.space import Prob

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class MarketComparison:
    market_price: Prob
    pooled_posterior: Prob
    consensus: Dict[OverlapModel, Optional[Prob]]

    @property
    def agrees(self) -> bool:
        return self.market_price == self.pooled_posterior


def two_expert_scenario(scn: RevisionScenario) -> ScenarioConfig:
    """Atoms h, a, b and the remainder; one expert rules out A, the other B"""
    weights = [Fraction(str(p)) for p in (scn.p_h, scn.p_a, scn.p_b)]
    weights.append(1 - sum(weights))
    return ScenarioConfig(
        name="market-vs-revision",
        hypothesis=["h"],
        space=SpaceSpec(atoms=["h", "a", "b", "rest"], weights=[str(w) for w in weights], true_atom="h"),
        experts=[
            ExpertSpec(id="not_a", info=["h", "b", "rest"]),
            ExpertSpec(id="not_b", info=["h", "a", "rest"]),
        ],
        numerics=NumericsSpec(rational=True),
        run=RunSpec(entry_order="fifo"),
    )


def market_vs_revision(scn: RevisionScenario, seed: int = 0) -> MarketComparison:
    transcript = run_market(two_expert_scenario(scn), seed)
    consensus: Dict[OverlapModel, Optional[Prob]] = {}
    for model in OverlapModel:
        try:
            consensus[model] = revise(replace(scn, overlap_model=model)).consensus
        except DegenerateDenominator:
            consensus[model] = None
    comparison = MarketComparison(
        market_price=transcript.final.xi,
        pooled_posterior=consensus_disjoint(RevisionScenario.parse(scn.p_h, scn.p_a, scn.p_b)),
        consensus=consensus,
    )
    if not comparison.agrees:
        logger.error("market_missed_pooled_posterior", market=float(comparison.market_price),
                     pooled=float(comparison.pooled_posterior))
    return comparison
