"""
Monte Carlo experiments: calibration of self-resolution, the incentive to
disclose, and manipulation against the crowd
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import structlog

from services.agents.base_agent import Policy
from services.agents.crowd import CROWD_ID, StabilizationMode, crowd_step, crowd_target
from services.chat.disclosure import PublicState
from services.engine.protocol import build_world, run_market
from services.errors import BadExperimentShape, CrowdBudgetExhausted
from services.harness.config import settings
from services.harness.schemas.reports import RunRecord
from services.harness.schemas.scenario import ScenarioConfig
from services.market.ledger import Ledger, execute_trade
from services.market.lmsr import MarketState, clamp_price, lmsr_price, shares_for_budget, shares_to_reach
from services.world.streams import run_seeds

logger = structlog.get_logger(__name__)

OK = "OK"
OUTSIDE = "OUTSIDE"
LOW_COUNT = "LOW_COUNT"

CALIBRATION_COLUMNS = [
    "lower", "upper", "count", "mean_price", "frequency", "interval_low", "interval_high", "flag",
]


@dataclass
class CalibrationReport:
    buckets: pd.DataFrame

    @property
    def passed(self) -> bool:
        return not (self.buckets["flag"] == OUTSIDE).any()

    def rows(self) -> List[Dict[str, Any]]:
        return self.buckets.to_dict(orient="records")


def calibration_report(
    runs: Sequence[RunRecord],
    width: Optional[float] = None,
    min_count: Optional[int] = None,
) -> CalibrationReport:
    """Bucket final prices and compare each bucket's theta-frequency to a 3-sigma binomial interval"""
    width = width or settings.calibration_bucket_width
    min_count = settings.min_bucket_count if min_count is None else min_count
    n_buckets = int(round(1 / width))
    done = [r for r in runs if r.error is None and r.theta is not None]
    if not done:
        return CalibrationReport(pd.DataFrame(columns=CALIBRATION_COLUMNS))

    df = pd.DataFrame({
        "price": [r.final_price_value for r in done],
        "theta": [r.theta for r in done],
    })
    df["bucket"] = np.minimum(np.floor(df["price"] / width + 1e-9), n_buckets - 1).astype(int)
    grouped = df.groupby("bucket").agg(
        count=("theta", "size"), mean_price=("price", "mean"), frequency=("theta", "mean")
    ).reset_index()

    half = 3 * np.sqrt(grouped["mean_price"] * (1 - grouped["mean_price"]) / grouped["count"])
    grouped["interval_low"] = (grouped["mean_price"] - half).clip(lower=0.0)
    grouped["interval_high"] = (grouped["mean_price"] + half).clip(upper=1.0)
    grouped["lower"] = grouped["bucket"] * width
    grouped["upper"] = (grouped["bucket"] + 1) * width
    inside = (grouped["frequency"] >= grouped["interval_low"] - 1e-12) & (
        grouped["frequency"] <= grouped["interval_high"] + 1e-12
    )
    grouped["flag"] = np.where(grouped["count"] < min_count, LOW_COUNT, np.where(inside, OK, OUTSIDE))
    return CalibrationReport(grouped[CALIBRATION_COLUMNS])


@dataclass(frozen=True)
class ProfitStats:
    policy: Policy
    mean: float
    std_error: float
    n: int

    def to_dict(self) -> Dict[str, Any]:
        return {"policy": self.policy.value, "mean": self.mean, "std_error": self.std_error, "n": self.n}


@dataclass
class ProfitReport:
    expert_id: str
    compliant: ProfitStats
    silent: ProfitStats

    @property
    def compliant_profitable(self) -> bool:
        return self.compliant.mean > 3 * self.compliant.std_error

    @property
    def silent_break_even(self) -> bool:
        return abs(self.silent.mean) <= 3 * self.silent.std_error

    @property
    def passed(self) -> bool:
        return self.compliant_profitable and self.silent_break_even


def _profit_stats(policy: Policy, profits: List[float]) -> ProfitStats:
    values = np.asarray(profits, dtype=float)
    se = float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
    return ProfitStats(policy=policy, mean=float(values.mean()), std_error=se, n=len(values))


def _with_policy(scenario: ScenarioConfig, expert_id: str, policy: Policy) -> ScenarioConfig:
    experts = [
        {**e.model_dump(mode="json"), "policy": policy.value} if e.id == expert_id else e.model_dump(mode="json")
        for e in scenario.experts
    ]
    return scenario.with_overrides(experts=experts)


def profit_experiment(scenario: ScenarioConfig, n_runs: int, seed: int = 0) -> ProfitReport:
    """Settled profit of the single informed expert, compliant versus silent, on paired seeds"""
    informed = [e for e in scenario.experts if e.policy is not Policy.IGNORANT_CROWD]
    if len(informed) != 1:
        raise BadExperimentShape(
            "profit experiment needs exactly one non-crowd expert",
            {"experts": [e.id for e in informed]},
        )
    if n_runs < 2:
        raise BadExperimentShape("profit experiment needs at least 2 runs", {"n_runs": n_runs})
    expert_id = informed[0].id
    variants = {}
    for policy in (Policy.COMPLIANT, Policy.SILENT_DEVIANT):
        variant = _with_policy(scenario, expert_id, policy)
        profits = [run_market(variant, s).profits[expert_id] for s in run_seeds(seed, n_runs)]
        variants[policy] = _profit_stats(policy, profits)

    report = ProfitReport(expert_id, variants[Policy.COMPLIANT], variants[Policy.SILENT_DEVIANT])
    logger.info("profit_experiment", expert=expert_id, compliant=report.compliant.to_dict(),
                silent=report.silent.to_dict(), passed=report.passed)
    return report


MANIPULATOR_ID = "manipulator"


@dataclass(frozen=True)
class ManipulationOutcome:
    budget: float
    ticks_held: int
    window: int
    spent: float
    position: float
    expected_loss: float

    @property
    def held(self) -> bool:
        return self.ticks_held >= self.window

    def to_dict(self) -> Dict[str, Any]:
        return {
            "budget": self.budget,
            "ticks_held": self.ticks_held,
            "window": self.window,
            "held": self.held,
            "spent": self.spent,
            "position": self.position,
            "expected_loss": self.expected_loss,
        }


@dataclass
class ManipulationReport:
    target: float
    distorted: float
    outcomes: List[ManipulationOutcome] = field(default_factory=list)


def _push_distance(scenario: ScenarioConfig) -> float:
    for e in scenario.experts:
        if e.policy is Policy.MANIPULATOR and e.push is not None:
            return e.push
    return scenario.market.manipulation_distance


def manipulation_experiment(
    scenario: ScenarioConfig, budgets: Sequence[float], seed: int = 0
) -> ManipulationReport:
    """Hold a distorted price against the crowd through one inactivity window, per budget

    Each tick the manipulator buys back to the distorted price with what is
    left of its budget and the crowd restores pi(H | Omega).
    """
    space = build_world(scenario, seed)
    h = scenario.hypothesis_event(space)
    target = crowd_target(PublicState.initial(space), space, h)
    clamp = scenario.market.price_clamp
    distorted = float(clamp_price(float(target) + _push_distance(scenario), clamp))
    window = scenario.market.inactivity_threshold
    report = ManipulationReport(target=float(target), distorted=distorted)

    for budget in budgets:
        market = MarketState(liquidity_b=scenario.market.liquidity_b)
        ledger = Ledger(scenario.market.endowment, scenario.market.collateral_fraction)
        ledger.open_account(CROWD_ID, members=scenario.market.crowd_size)
        account = ledger.open_account(MANIPULATOR_ID, cash=float(budget))
        crowd_step(ledger, market, target, StabilizationMode(), CROWD_ID, clamp)

        ticks_held = 0
        for _ in range(window):
            wanted = shares_to_reach(market, distorted)
            affordable = shares_for_budget(market, account.cash) * (1 - 1e-9)
            execute_trade(ledger, market, MANIPULATOR_ID, max(0.0, min(wanted, affordable)))
            if not math.isclose(lmsr_price(market), distorted, abs_tol=1e-9):
                break
            ticks_held += 1
            try:
                crowd_step(ledger, market, target, StabilizationMode(), CROWD_ID, clamp)
            except CrowdBudgetExhausted:
                logger.warning("crowd_overpowered", budget=budget)
                ticks_held = window
                break

        report.outcomes.append(ManipulationOutcome(
            budget=float(budget),
            ticks_held=ticks_held,
            window=window,
            spent=float(budget) - account.cash,
            position=account.position,
            expected_loss=float(budget) - account.cash - account.position * float(target),
        ))
        logger.info("manipulation_outcome", **report.outcomes[-1].to_dict())
    return report
