"""
Multi-unit disclosure planning: order indivisible information units so the
sequence of public posteriors travels the longest path
"""

from itertools import permutations
from typing import List, Sequence, Tuple

from services.chat.disclosure import PublicState
from services.errors import UnitsInconsistent
from services.world.space import Event, Prob, SampleSpace, cond_prob


def trajectory_length(
    space: SampleSpace, h: Event, omega: Event, units: Sequence[Event]
) -> Prob:
    total = space.zero()
    current = omega
    before = cond_prob(space, h, current)
    for unit in units:
        current = current & unit
        after = cond_prob(space, h, current)
        total += abs(after - before)
        before = after
    return total


def split_units(
    space: SampleSpace,
    h: Event,
    info: Event,
    public: PublicState,
    unit_cells: Sequence[Event],
) -> List[Event]:
    """Disclosure order maximizing total price movement; ties go to lower unit indices"""
    if not unit_cells:
        raise UnitsInconsistent("no information units given")
    joint = space.full
    for unit in unit_cells:
        if space.true_index not in unit:
            raise UnitsInconsistent("every unit must contain the true atom")
        joint = joint & unit
    if joint != info:
        raise UnitsInconsistent(
            "units do not intersect to the realized information",
            {"units": space.labels(joint), "info": space.labels(info)},
        )

    margin = 0 if space.is_rational else 1e-12
    best: Tuple[Prob, Tuple[int, ...]] = (None, ())
    # permutations() yields index orders lexicographically, so the first maximum wins ties
    for order in permutations(range(len(unit_cells))):
        length = trajectory_length(space, h, public.omega, [unit_cells[i] for i in order])
        if best[0] is None or length > best[0] + margin:
            best = (length, order)
    return [unit_cells[i] for i in best[1]]
