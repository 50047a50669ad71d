"""
Protocol Engine
The round loop: crowd stabilization, inactivity window, entry sweep and the
entrant's trade and disclosure, repeated until nobody is willing to enter;
then close, resolve and settle.
"""

from dataclasses import replace
from typing import Dict, FrozenSet, List, Optional

import structlog
from structlog.contextvars import bound_contextvars

from services.agents.base_agent import Decision, ExpertAgent, MarketView, entry_decision
from services.agents.crowd import CROWD_ID, StabilizationKind, crowd_step, crowd_target
from services.agents.registry import build_agent
from services.chat.disclosure import ChatMessage, PublicState
from services.engine.transcript import Round, Transcript
from services.errors import CrowdBudgetExhausted
from services.harness.schemas.scenario import ScenarioConfig
from services.market.ledger import Ledger
from services.market.lmsr import MarketState, advance_clock, inactivity_closed, lmsr_price, market_maker_pnl
from services.market.resolution import resolve, settle
from services.market.rewards import rewards
from services.world.space import Event, Prob, SampleSpace
from services.world.streams import Stream, stream_rng, stream_seed

logger = structlog.get_logger(__name__)


def true_atom_for(scenario: ScenarioConfig, seed: int) -> str:
    """The configured true atom, or a draw from the prior when the scenario samples it"""
    if not scenario.space.sample_true_atom:
        return scenario.space.true_atom
    space = scenario.build_space()
    weights = [float(w) for w in space.weights]
    total = sum(weights)
    i = int(stream_rng(seed, Stream.TRUE_STATE).choice(space.size, p=[w / total for w in weights]))
    return space.atoms[i]


def build_world(scenario: ScenarioConfig, seed: int) -> SampleSpace:
    return scenario.build_space(true_atom=true_atom_for(scenario, seed))


def build_agents(scenario: ScenarioConfig, space: SampleSpace) -> List[ExpertAgent]:
    return [
        build_agent(
            spec.id,
            spec.policy,
            scenario.expert_partition(spec, space),
            space,
            units=scenario.expert_units(spec, space),
            params={"push": spec.push, "false_claims": spec.false_claims},
        )
        for spec in scenario.experts
    ]


def expert_infos(scenario: ScenarioConfig, space: SampleSpace) -> Dict[str, Event]:
    """Realized I_n for every expert, the crowd included"""
    infos = {CROWD_ID: space.full}
    for spec in scenario.experts:
        infos[spec.id] = scenario.expert_partition(spec, space).cell_of(space.true_index)
    return infos


def initial_entered(scenario: ScenarioConfig, space: SampleSpace) -> FrozenSet[str]:
    """e_1: the crowd and every ignorant expert"""
    return frozenset(n for n, info in expert_infos(scenario, space).items() if info == space.full)


class MarketRun:
    """One isolated engine instance"""

    def __init__(self, scenario: ScenarioConfig, seed: int):
        self.scenario = scenario
        self.seed = seed
        self.space = build_world(scenario, seed)
        self.h = scenario.hypothesis_event(self.space)
        self.mode = scenario.stabilization_mode()
        self.exact = scenario.numerics.rational and self.mode.kind is StabilizationKind.INSTANT

        market_cfg = scenario.market
        self.market = MarketState(liquidity_b=market_cfg.liquidity_b)
        self.ledger = Ledger(market_cfg.endowment, market_cfg.collateral_fraction)
        self.ledger.open_account(CROWD_ID, members=market_cfg.crowd_size)
        self.agents = build_agents(scenario, self.space)
        for agent in self.agents:
            self.ledger.open_account(agent.agent_id)

        self.public = PublicState.initial(self.space)
        self.entered = set(initial_entered(scenario, self.space))
        for agent in self.agents:
            if agent.agent_id in self.entered:
                agent.mark_entered()
        self.entry_rng = stream_rng(seed, Stream.ENTRY_ORDER)
        self.degenerate = False

    def view(self, price: Prob) -> MarketView:
        return MarketView(
            space=self.space,
            hypothesis=self.h,
            public=self.public,
            market=self.market,
            ledger=self.ledger,
            price=price,
            tolerance=self.scenario.tolerance,
            trade_fraction=self.scenario.market.trade_fraction,
            price_clamp=self.scenario.market.price_clamp,
            manipulation_distance=self.scenario.market.manipulation_distance,
        )

    def stabilize(self, trajectory: List[float]) -> Prob:
        """Let the crowd act; returns the stabilized price xi"""
        target = crowd_target(self.public, self.space, self.h)
        try:
            step = crowd_step(self.ledger, self.market, target, self.mode, CROWD_ID,
                              self.scenario.market.price_clamp)
        except CrowdBudgetExhausted as e:
            self.degenerate = True
            logger.warning("crowd_budget_exhausted", round=self.public.round, **{
                k: v for k, v in e.details.items() if k != "trade"
            })
            price = lmsr_price(self.market)
            trajectory.append(price)
            return price
        trajectory.extend(step.trajectory)
        return target if self.exact else lmsr_price(self.market)

    def candidates(self, price: Prob) -> List[ExpertAgent]:
        view = self.view(price)
        return [a for a in self.agents if entry_decision(a, view) is Decision.ENTER]

    def pick(self, candidates: List[ExpertAgent]) -> ExpertAgent:
        if self.scenario.run.entry_order == "fifo":
            return candidates[0]
        return candidates[int(self.entry_rng.integers(len(candidates)))]

    def wait_for_close(self) -> None:
        threshold = self.scenario.market.inactivity_threshold
        remaining = threshold - self.market.quiet_ticks
        if remaining > 0:
            advance_clock(self.market, remaining)
        self.market.closed = inactivity_closed(self.market, threshold)

    def enter(self, agent: ExpertAgent, k: int, price: Prob, trajectory: List[float]):
        """Run the entrant's steps, restabilizing after each; returns (xi, messages)"""
        agent.mark_entered()
        self.entered.add(agent.agent_id)
        messages: List[ChatMessage] = []
        while True:
            action = agent.act_with_logging(self.view(price))
            messages.extend(action.messages)
            # follow-up steps of one entrant all belong to round k
            self.public = replace(action.public, round=k)
            price = self.stabilize(trajectory)
            if self.degenerate or not agent.has_followup():
                break
        self.public = replace(self.public, round=k + 1)
        return price, messages

    def run(self) -> Transcript:
        transcript = Transcript(
            scenario_name=self.scenario.name,
            fingerprint=self.scenario.fingerprint(),
            seed=self.seed,
            space=self.space,
            ticked=self.mode.kind is StabilizationKind.TICKED,
        )
        trajectory: List[float] = []
        price = self.stabilize(trajectory)
        transcript.rounds.append(Round(1, frozenset(self.entered), None, price, self.public.omega,
                                       trajectory=tuple(trajectory)))
        self._log_round(transcript.rounds[-1])

        k = 1
        while not self.degenerate:
            candidates = self.candidates(price)
            if not candidates:
                self.wait_for_close()
                break
            entrant = self.pick(candidates)
            trajectory = []
            price, messages = self.enter(entrant, k, price, trajectory)
            k += 1
            transcript.rounds.append(Round(k, frozenset(self.entered), entrant.agent_id, price,
                                           self.public.omega, tuple(messages), tuple(trajectory)))
            self._log_round(transcript.rounds[-1])

        self.market.closed = True
        resolution = resolve(self.market, stream_seed(self.seed, Stream.RESOLUTION), final_price=price)
        transcript.resolution = resolution
        transcript.balances = settle(self.ledger, resolution)
        transcript.profits = {
            n: transcript.balances[n] - self.ledger.initial_endowment * a.members
            for n, a in self.ledger.accounts.items()
        }
        transcript.rewards = rewards(
            transcript.balances, self.scenario.run.reward_pool, self.scenario.run.reward_precision
        )
        transcript.mm_pnl = market_maker_pnl(self.market, resolution.theta)
        transcript.degenerate = self.degenerate
        transcript.trades = list(self.ledger.trades)
        logger.info("run_finished", k_infinity=transcript.k_infinity, final_price=float(price),
                    theta=resolution.theta, degenerate=self.degenerate)
        return transcript

    def _log_round(self, r: Round) -> None:
        logger.info("round_stabilized", k=r.k, entrant=r.entrant, xi=float(r.xi),
                    omega=self.space.labels(r.omega))


def run_market(scenario: ScenarioConfig, seed: Optional[int] = None) -> Transcript:
    """Run one market to resolution; deterministic given (scenario, seed)"""
    seed = scenario.run.seed if seed is None else seed
    with bound_contextvars(run_seed=seed, scenario=scenario.name):
        return MarketRun(scenario, seed).run()
