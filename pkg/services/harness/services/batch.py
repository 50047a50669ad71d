"""
Batch Monte Carlo execution
Isolated engine instances per seed, fanned out over worker processes
"""

import asyncio
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence

import structlog

from services.engine.checks import CheckReport, run_checks
from services.engine.protocol import run_market
from services.engine.transcript import Transcript
from services.errors import EntangleError, ValidationError
from services.harness.config import settings
from services.harness.middleware.logging import configure_logging
from services.harness.schemas.reports import RunRecord, RunReport
from services.harness.schemas.scenario import ScenarioConfig
from services.world.space import format_prob
from services.world.streams import run_seeds

logger = structlog.get_logger(__name__)


def summarize(transcript: Transcript, report: Optional[CheckReport], checks_enabled: bool) -> RunRecord:
    resolution = transcript.resolution
    return RunRecord(
        seed=transcript.seed,
        true_atom=transcript.space.true_atom,
        k_infinity=transcript.k_infinity,
        prices=[format_prob(p) for p in transcript.prices],
        entrants=transcript.entrants,
        final_price=format_prob(resolution.final_price) if resolution else None,
        theta=resolution.theta if resolution else None,
        checks_enabled=checks_enabled,
        checks_passed=report.passed if report else None,
        checks=report.to_dict() if report else None,
        balances=transcript.balances,
        profits=transcript.profits,
        rewards={k: str(v) for k, v in transcript.rewards.items()},
        mm_pnl=transcript.mm_pnl,
        trajectory_length=transcript.trajectory_length,
        degenerate=transcript.degenerate,
    )


def run_one(scenario: ScenarioConfig, seed: int, checks: bool = True) -> RunRecord:
    """One run and its checks; domain errors are recorded, not raised"""
    try:
        transcript = run_market(scenario, seed)
        report = run_checks(transcript, scenario) if checks else None
        return summarize(transcript, report, checks and scenario.fully_compliant)
    except EntangleError as e:
        logger.warning("run_failed", seed=seed, code=e.code, error=e.message)
        return RunRecord(seed=seed, error=e.to_dict())


async def _run_parallel(
    scenario: ScenarioConfig, seeds: Sequence[int], parallelism: int, checks: bool
) -> List[RunRecord]:
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(
        max_workers=parallelism,
        initializer=configure_logging,
        initargs=(settings.log_level, settings.log_format),
    ) as pool:
        return await asyncio.gather(
            *(loop.run_in_executor(pool, run_one, scenario, seed, checks) for seed in seeds)
        )


def run_batch(
    config: ScenarioConfig,
    n_runs: int,
    base_seed: int = 0,
    parallelism: Optional[int] = None,
    checks: bool = True,
) -> RunReport:
    """Runs seeds base_seed..base_seed+n-1; the report does not depend on parallelism"""
    if n_runs < 0:
        raise ValidationError("n_runs must be nonnegative", {"n_runs": n_runs})
    parallelism = parallelism or settings.parallelism
    seeds = run_seeds(base_seed, n_runs)
    logger.info("batch_started", scenario=config.name, n_runs=n_runs, parallelism=parallelism)

    if parallelism <= 1 or n_runs <= 1:
        records = [run_one(config, seed, checks) for seed in seeds]
    else:
        records = asyncio.run(_run_parallel(config, seeds, parallelism, checks))

    report = RunReport(
        scenario=config.name,
        fingerprint=config.fingerprint(),
        liquidity_b=config.market.liquidity_b,
        records=sorted(records, key=lambda r: r.seed),
    )
    logger.info("batch_finished", **report.summary())
    return report
