"""
Transcript Checkers
Entanglement clauses, the final-state identities, the pooling classification
and the post-trade audit
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

from services.agents.base_agent import differs
from services.engine.protocol import expert_infos
from services.engine.transcript import Transcript
from services.harness.schemas.scenario import ScenarioConfig
from services.world.space import (
    DirectArgumentClass,
    Event,
    classify_direct_argument,
    cond_prob,
    is_null,
    prob,
)


class T2Class(str, Enum):
    PROVED_H = "PROVED_H"
    PROVED_NOT_H = "PROVED_NOT_H"
    FULL_POOLING = "FULL_POOLING"
    VIOLATION = "VIOLATION"
    NOT_APPLICABLE = "NOT_APPLICABLE"


@dataclass
class ClauseResult:
    name: str
    passed: bool = True
    first_failure: Optional[int] = None
    failing: List[str] = field(default_factory=list)
    detail: Dict[str, Any] = field(default_factory=dict)

    def fail(self, k: Optional[int] = None, who: Optional[str] = None, **detail) -> None:
        if self.passed:
            self.first_failure = k
            self.detail = detail
        self.passed = False
        if who is not None and who not in self.failing:
            self.failing.append(who)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "first_failure": self.first_failure,
            "failing": list(self.failing),
            "detail": {k: str(v) for k, v in self.detail.items()},
        }


@dataclass
class CheckReport:
    ent1: ClauseResult
    ent2: ClauseResult
    ent3a: ClauseResult
    ent3b: ClauseResult
    final_state_ok: Optional[bool] = None
    t2_class: T2Class = T2Class.NOT_APPLICABLE
    t2_arms: List[T2Class] = field(default_factory=list)
    audit: List[ClauseResult] = field(default_factory=list)

    @property
    def entangled(self) -> bool:
        return all(c.passed for c in (self.ent1, self.ent2, self.ent3a, self.ent3b))

    @property
    def passed(self) -> bool:
        return self.entangled and self.final_state_ok is not False and self.t2_class is not T2Class.VIOLATION

    def to_dict(self) -> Dict[str, Any]:
        return {
            "entangled": self.entangled,
            "clauses": {c.name: c.to_dict() for c in (self.ent1, self.ent2, self.ent3a, self.ent3b)},
            "final_state_ok": self.final_state_ok,
            "t2_class": self.t2_class.value,
            "t2_arms": [a.value for a in self.t2_arms],
            "audit": [c.to_dict() for c in self.audit],
        }


def _tolerance(scenario: ScenarioConfig, epsilon: Optional[float]) -> float:
    return scenario.tolerance if epsilon is None else epsilon


def _hypothesis(transcript: Transcript, scenario: ScenarioConfig, h: Optional[Event]) -> Event:
    return scenario.hypothesis_event(transcript.space) if h is None else h


def check_entangled(
    transcript: Transcript,
    scenario: ScenarioConfig,
    h: Optional[Event] = None,
    epsilon: Optional[float] = None,
) -> CheckReport:
    space = transcript.space
    h = _hypothesis(transcript, scenario, h)
    tol = _tolerance(scenario, epsilon)
    infos = expert_infos(scenario, space)
    ent1, ent2 = ClauseResult("ent1"), ClauseResult("ent2")
    ent3a, ent3b = ClauseResult("ent3a"), ClauseResult("ent3b")

    previous = None
    for r in transcript.rounds:
        for n in sorted(r.entered):
            if not is_null(space, r.omega - infos[n]):
                ent1.fail(r.k, n, omega=space.labels(r.omega), info=space.labels(infos[n]))
        public_posterior = cond_prob(space, h, r.omega)
        if differs(r.xi, public_posterior, tol):
            ent2.fail(r.k, xi=r.xi, posterior=public_posterior)
        if r.entrant is not None and previous is not None:
            private = cond_prob(space, h, previous.omega & infos[r.entrant])
            if not differs(private, previous.xi, tol):
                ent3a.fail(r.k, r.entrant, posterior=private, xi=previous.xi)
        previous = r

    final = transcript.final
    for n, info in infos.items():
        if n in final.entered:
            continue
        private = cond_prob(space, h, final.omega & info)
        if differs(private, final.xi, tol):
            ent3b.fail(final.k, n, posterior=private, xi=final.xi)

    return CheckReport(ent1=ent1, ent2=ent2, ent3a=ent3a, ent3b=ent3b)


def final_state_clauses(
    transcript: Transcript,
    scenario: ScenarioConfig,
    h: Optional[Event] = None,
    epsilon: Optional[float] = None,
) -> List[ClauseResult]:
    """The final-state identities, each reported with the ids that break it"""
    space = transcript.space
    h = _hypothesis(transcript, scenario, h)
    tol = _tolerance(scenario, epsilon)
    infos = expert_infos(scenario, space)
    final = transcript.final

    pooled = ClauseResult("omega_is_pooled_info")
    intersection = space.full
    for n in final.entered:
        intersection = intersection & infos[n]
    if final.omega != intersection:
        pooled.fail(final.k, omega=space.labels(final.omega), intersection=space.labels(intersection))

    public = ClauseResult("price_is_public_posterior")
    public_posterior = cond_prob(space, h, final.omega)
    if differs(final.xi, public_posterior, tol):
        public.fail(final.k, xi=final.xi, posterior=public_posterior)

    private = ClauseResult("price_is_every_private_posterior")
    for n, info in infos.items():
        posterior = cond_prob(space, h, final.omega & info)
        if differs(posterior, final.xi, tol):
            private.fail(final.k, n, posterior=posterior, xi=final.xi)

    return [pooled, public, private]


def check_final_state(
    transcript: Transcript,
    scenario: ScenarioConfig,
    h: Optional[Event] = None,
    epsilon: Optional[float] = None,
) -> bool:
    return all(c.passed for c in final_state_clauses(transcript, scenario, h, epsilon))


def t2_arms(transcript: Transcript, scenario: ScenarioConfig, h: Optional[Event] = None) -> List[T2Class]:
    """Every satisfied outcome arm, up to null sets"""
    space = transcript.space
    h = _hypothesis(transcript, scenario, h)
    omega = transcript.final.omega
    pooled = space.full
    for info in expert_infos(scenario, space).values():
        pooled = pooled & info

    arms = []
    if is_null(space, omega - h):
        arms.append(T2Class.PROVED_H)
    if is_null(space, omega & h):
        arms.append(T2Class.PROVED_NOT_H)
    if prob(space, omega ^ pooled) == 0:
        arms.append(T2Class.FULL_POOLING)
    return arms


def check_t2(transcript: Transcript, scenario: ScenarioConfig, h: Optional[Event] = None) -> T2Class:
    space = transcript.space
    h = _hypothesis(transcript, scenario, h)
    infos = expert_infos(scenario, space)
    if any(classify_direct_argument(space, info, h) is DirectArgumentClass.NONE for info in infos.values()):
        return T2Class.NOT_APPLICABLE
    arms = t2_arms(transcript, scenario, h)
    return arms[0] if arms else T2Class.VIOLATION


def audit(transcript: Transcript, scenario: ScenarioConfig, epsilon: Optional[float] = None) -> List[ClauseResult]:
    """Consistency of the final price with the final public information, on any transcript"""
    return final_state_clauses(transcript, scenario, epsilon=epsilon)


def run_checks(
    transcript: Transcript,
    scenario: ScenarioConfig,
    epsilon: Optional[float] = None,
) -> CheckReport:
    """All checkers; the final-state check only counts for fully-compliant scenarios"""
    report = check_entangled(transcript, scenario, epsilon=epsilon)
    report.audit = audit(transcript, scenario, epsilon)
    if scenario.fully_compliant:
        report.final_state_ok = all(c.passed for c in report.audit)
    report.t2_class = check_t2(transcript, scenario)
    if report.t2_class is not T2Class.NOT_APPLICABLE:
        report.t2_arms = t2_arms(transcript, scenario)
    return report
