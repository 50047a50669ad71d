"""
Finite Probability Spaces
Weighted atoms, events, partitions, conditional probability and the
direct-argument classification of information events
"""

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, List, Sequence, Tuple, Union

from services.errors import InvalidSpace, ZeroConditioningEvent

Prob = Union[Fraction, float]

FLOAT_NORMALIZATION_TOLERANCE = 1e-12


def parse_prob(value: Union[str, int, float, Fraction], rational: bool = True) -> Prob:
    """Parse "1/3", "0.25", 0.25 into a Fraction (rational mode) or a float"""
    if isinstance(value, Fraction):
        exact = value
    elif isinstance(value, str):
        try:
            exact = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise InvalidSpace(f"Cannot parse probability {value!r}: {e}")
    elif isinstance(value, (int, float)):
        if not rational:
            return float(value)
        exact = Fraction(str(value))
    else:
        raise InvalidSpace(f"Unsupported probability value {value!r}")
    return exact if rational else float(exact)


def format_prob(value: Prob) -> str:
    """Render exact fractions as "p/q" and floats at 12 significant digits"""
    if isinstance(value, Fraction):
        return str(value)
    return f"{float(value):.12g}"


@dataclass(frozen=True)
class Event:
    """A set of atom indices"""
    members: FrozenSet[int] = frozenset()

    @classmethod
    def of(cls, indices: Iterable[int]) -> "Event":
        return cls(frozenset(indices))

    def __and__(self, other: "Event") -> "Event":
        return Event(self.members & other.members)

    def __or__(self, other: "Event") -> "Event":
        return Event(self.members | other.members)

    def __sub__(self, other: "Event") -> "Event":
        return Event(self.members - other.members)

    def __xor__(self, other: "Event") -> "Event":
        return Event(self.members ^ other.members)

    def __contains__(self, index: int) -> bool:
        return index in self.members

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class SampleSpace:
    """Finite weighted atoms with a designated true atom"""
    atoms: Tuple[str, ...]
    weights: Tuple[Prob, ...]
    true_atom: str
    _index: Dict[str, int] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.atoms) == 0:
            raise InvalidSpace("sample space has no atoms")
        if len(set(self.atoms)) != len(self.atoms):
            dupes = sorted(a for a, n in Counter(self.atoms).items() if n > 1)
            raise InvalidSpace(f"atom identifiers are not unique: {dupes}", {"invariant": "unique_atoms"})
        if len(self.weights) != len(self.atoms):
            raise InvalidSpace("weights and atoms differ in length", {"invariant": "weights_per_atom"})
        if any(w < 0 for w in self.weights):
            raise InvalidSpace("weights must be nonnegative", {"invariant": "nonnegative_weights"})

        total = sum(self.weights)
        if self.is_rational:
            if total != 1:
                raise InvalidSpace(f"weights sum to {total}, not 1", {"invariant": "normalization"})
        elif abs(float(total) - 1.0) > FLOAT_NORMALIZATION_TOLERANCE:
            raise InvalidSpace(f"weights sum to {float(total)!r}, not 1", {"invariant": "normalization"})

        object.__setattr__(self, "_index", {atom: i for i, atom in enumerate(self.atoms)})
        if self.true_atom not in self._index:
            raise InvalidSpace(f"true atom {self.true_atom!r} is not an atom", {"invariant": "true_atom"})
        if self.weights[self._index[self.true_atom]] <= 0:
            raise InvalidSpace("true atom has zero weight", {"invariant": "true_atom_weight"})

    @classmethod
    def build(
        cls,
        atoms: Sequence[str],
        weights: Sequence[Union[str, float, Fraction]],
        true_atom: str,
        rational: bool = True,
    ) -> "SampleSpace":
        return cls(tuple(atoms), tuple(parse_prob(w, rational) for w in weights), true_atom)

    @property
    def is_rational(self) -> bool:
        return all(isinstance(w, Fraction) for w in self.weights)

    @property
    def size(self) -> int:
        return len(self.atoms)

    @property
    def full(self) -> Event:
        return Event(frozenset(range(self.size)))

    @property
    def true_index(self) -> int:
        return self._index[self.true_atom]

    def index(self, atom: str) -> int:
        try:
            return self._index[atom]
        except KeyError:
            raise InvalidSpace(f"unknown atom {atom!r}")

    def event(self, atoms: Iterable[str]) -> Event:
        return Event(frozenset(self.index(a) for a in atoms))

    def complement(self, e: Event) -> Event:
        return self.full - e

    def labels(self, e: Event) -> List[str]:
        """Atom identifiers of an event, in sample-space order"""
        return [self.atoms[i] for i in sorted(e.members)]

    def zero(self) -> Prob:
        return Fraction(0) if self.is_rational else 0.0


@dataclass(frozen=True)
class Partition:
    """Pairwise-disjoint nonempty cells covering every atom"""
    cells: Tuple[Event, ...]

    @classmethod
    def build(cls, space: SampleSpace, cells: Iterable[Event]) -> "Partition":
        cells = tuple(cells)
        covered = set()
        for cell in cells:
            if len(cell) == 0:
                raise InvalidSpace("partition has an empty cell", {"invariant": "no_empty_cell"})
            if not cell.members <= space.full.members:
                raise InvalidSpace("partition cell leaves the atom range", {"invariant": "cell_in_range"})
            if covered & cell.members:
                raise InvalidSpace("partition cells overlap", {"invariant": "pairwise_disjoint"})
            covered |= cell.members
        if covered != set(space.full.members):
            raise InvalidSpace("partition cells do not cover the space", {"invariant": "covering"})
        return cls(cells)

    @classmethod
    def trivial(cls, space: SampleSpace) -> "Partition":
        return cls((space.full,))

    @classmethod
    def from_info(cls, space: SampleSpace, info: Event) -> "Partition":
        """{I, Ω∖I}, or {Ω} when I is the whole space"""
        rest = space.complement(info)
        if len(rest) == 0:
            return cls.trivial(space)
        return cls.build(space, (info, rest))

    def cell_of(self, index: int) -> Event:
        for cell in self.cells:
            if index in cell:
                return cell
        raise InvalidSpace(f"atom index {index} is not covered by the partition")

    def __contains__(self, e: Event) -> bool:
        return e in self.cells


class DirectArgumentClass(str, Enum):
    SUBSET_H = "SUBSET_H"
    SUBSET_NOT_H = "SUBSET_NOT_H"
    SUPERSET_H = "SUPERSET_H"
    SUPERSET_NOT_H = "SUPERSET_NOT_H"
    NONE = "NONE"


def prob(space: SampleSpace, e: Event) -> Prob:
    total = space.zero()
    for i in e.members:
        total += space.weights[i]
    return total


def is_null(space: SampleSpace, e: Event) -> bool:
    return prob(space, e) == 0


def cond_prob(space: SampleSpace, target: Event, given: Event) -> Prob:
    denominator = prob(space, given)
    if denominator == 0:
        raise ZeroConditioningEvent(
            "conditioning on a null event",
            {"given": space.labels(given)},
        )
    return prob(space, target & given) / denominator


def realized_info(partition: Partition, true_atom: int) -> Event:
    """The cell I_n that contains the true atom"""
    return partition.cell_of(true_atom)


def classify_direct_argument(space: SampleSpace, info: Event, h: Event) -> DirectArgumentClass:
    # precedence SUBSET_H > SUBSET_NOT_H > SUPERSET_H > SUPERSET_NOT_H
    not_h = space.complement(h)
    if is_null(space, info - h):
        return DirectArgumentClass.SUBSET_H
    if is_null(space, info & h):
        return DirectArgumentClass.SUBSET_NOT_H
    if is_null(space, h - info):
        return DirectArgumentClass.SUPERSET_H
    if is_null(space, not_h - info):
        return DirectArgumentClass.SUPERSET_NOT_H
    return DirectArgumentClass.NONE
