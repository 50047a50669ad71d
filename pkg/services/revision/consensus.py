"""
Iterated Posterior Revision
Two informed experts announce posteriors; the consensus they reach depends on
what each believes about the overlap of the other's information.
"""

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

from scipy import integrate

from services.errors import DegenerateDenominator, DegenerateInterval, ValidationError
from services.world.space import Prob

QUAD_EPSABS = 1e-12

# every regime converges after the first exchange of announcements
CONVERGENCE_STEPS = 2


class OverlapModel(str, Enum):
    DISJOINT = "DISJOINT"
    NESTED = "NESTED"
    UNIFORM_OVERLAP = "UNIFORM_OVERLAP"


@dataclass(frozen=True)
class RevisionScenario:
    """Priors of H and of the two events A, B ruled out by the experts"""
    p_h: Prob
    p_a: Prob
    p_b: Prob
    overlap_model: OverlapModel = OverlapModel.DISJOINT

    def __post_init__(self):
        if not 0 < self.p_h < 1:
            raise ValidationError(f"p_h must lie in (0, 1), got {self.p_h}")
        for name in ("p_a", "p_b"):
            value = getattr(self, name)
            if not 0 <= value < 1:
                raise ValidationError(f"{name} must lie in [0, 1), got {value}")
        if self.p_h + self.p_a + self.p_b > 1:
            raise ValidationError("p_h + p_a + p_b exceeds 1")

    @classmethod
    def parse(cls, p_h, p_a, p_b, overlap_model: OverlapModel = OverlapModel.DISJOINT) -> "RevisionScenario":
        """Exact fractions from strings or numbers"""
        return cls(Fraction(str(p_h)), Fraction(str(p_a)), Fraction(str(p_b)), overlap_model)


@dataclass(frozen=True)
class Announcements:
    expert_a: Prob  # pi(H | not A)
    expert_b: Prob  # pi(H | not B)
    crowd: Prob  # pi(H)


@dataclass(frozen=True)
class UniformOverlap:
    closed_form: float
    quadrature: float


@dataclass(frozen=True)
class RevisionResult:
    round1: Announcements
    consensus: Prob
    steps: int = CONVERGENCE_STEPS
    quadrature: Optional[float] = None


def _conditioned(p_h: Prob, ruled_out: Prob) -> Prob:
    denominator = 1 - ruled_out
    if denominator <= 0:
        raise DegenerateDenominator("ruled-out mass leaves nothing to condition on",
                                    {"ruled_out": str(ruled_out)})
    return p_h / denominator


def round1(scn: RevisionScenario) -> Announcements:
    return Announcements(
        expert_a=_conditioned(scn.p_h, scn.p_a),
        expert_b=_conditioned(scn.p_h, scn.p_b),
        crowd=scn.p_h,
    )


def consensus_disjoint(scn: RevisionScenario) -> Prob:
    return _conditioned(scn.p_h, scn.p_a + scn.p_b)


def consensus_nested(scn: RevisionScenario) -> Prob:
    return _conditioned(scn.p_h, max(scn.p_a, scn.p_b))


def consensus_uniform_overlap(scn: RevisionScenario, fallback: bool = True) -> UniformOverlap:
    """Expected posterior when pi(A ∪ B) is uniform between its extreme values"""
    a = float(max(scn.p_a, scn.p_b))
    b = float(scn.p_a + scn.p_b)
    if b >= 1:
        raise DegenerateDenominator("p_a + p_b reaches 1", {"upper": b})
    if a == b:
        if not fallback:
            raise DegenerateInterval("overlap interval is a single point", {"a": a, "b": b})
        nested = float(consensus_nested(scn))
        return UniformOverlap(closed_form=nested, quadrature=nested)

    p_h = float(scn.p_h)
    closed = p_h * (math.log1p(-a) - math.log1p(-b)) / (b - a)
    area, _ = integrate.quad(lambda x: 1.0 / (1.0 - x), a, b, epsabs=QUAD_EPSABS)
    return UniformOverlap(closed_form=closed, quadrature=p_h * area / (b - a))


def revise(scn: RevisionScenario) -> RevisionResult:
    """Two-step announcement dynamics under the scenario's overlap model"""
    first = round1(scn)
    if scn.overlap_model is OverlapModel.DISJOINT:
        return RevisionResult(first, consensus_disjoint(scn))
    if scn.overlap_model is OverlapModel.NESTED:
        return RevisionResult(first, consensus_nested(scn))
    overlap = consensus_uniform_overlap(scn)
    return RevisionResult(first, overlap.closed_form, quadrature=overlap.quadrature)
