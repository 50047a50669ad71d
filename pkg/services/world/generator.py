"""
Random Scenario Generator
Seeded test-case factory for entanglement and pooling sweeps
"""

from fractions import Fraction
from typing import List, Optional

import numpy as np

from services.errors import InfeasibleConstraints
from services.harness.schemas.scenario import (
    ExpertSpec,
    MarketSpec,
    NumericsSpec,
    RunSpec,
    ScenarioConfig,
    ScenarioConstraints,
    SpaceSpec,
)
from services.world.streams import Stream, stream_rng

MAX_ATOM_WEIGHT = 20


def _random_cells(rng: np.random.Generator, members: List[int], max_cells: int) -> List[List[int]]:
    if not members:
        return []
    n_cells = int(rng.integers(1, min(max_cells, len(members)) + 1))
    labels = rng.integers(0, n_cells, size=len(members))
    cells = [[m for m, lab in zip(members, labels) if lab == c] for c in range(n_cells)]
    return [c for c in cells if c]


def _random_subset(rng: np.random.Generator, members: List[int]) -> List[int]:
    return [m for m in members if rng.random() < 0.5]


def _direct_argument_info(
    rng: np.random.Generator, n_atoms: int, h: List[int], true_atom: int, informed: bool
) -> List[int]:
    """A realized info nested with H or with its complement, containing the true atom"""
    not_h = [i for i in range(n_atoms) if i not in h]
    own_side, other_side = (h, not_h) if true_atom in h else (not_h, h)
    if informed or rng.random() < 0.5:
        # subset of the true atom's side: proper, since both sides are nonempty
        rest = [i for i in own_side if i != true_atom]
        return sorted({true_atom, *_random_subset(rng, rest)})
    anchor = own_side if rng.random() < 0.5 else other_side
    rest = [i for i in range(n_atoms) if i not in anchor]
    return sorted({true_atom, *anchor, *_random_subset(rng, rest)})


def _partition(
    rng: np.random.Generator,
    n_atoms: int,
    h: List[int],
    true_atom: int,
    constraints: ScenarioConstraints,
    informed: bool,
) -> List[List[int]]:
    if constraints.direct_arguments:
        info = _direct_argument_info(rng, n_atoms, h, true_atom, informed)
        rest = [i for i in range(n_atoms) if i not in info]
        return [info] + _random_cells(rng, rest, constraints.max_cells)

    while True:
        cells = _random_cells(rng, list(range(n_atoms)), constraints.max_cells)
        if not informed or len(cells) > 1:
            return cells


def random_scenario(
    seed: int,
    n_atoms: int,
    n_experts: int,
    constraints: Optional[ScenarioConstraints] = None,
) -> ScenarioConfig:
    """Generate a valid scenario; the same seed reproduces it exactly"""
    constraints = constraints or ScenarioConstraints()
    if n_atoms < 2:
        raise InfeasibleConstraints("need at least 2 atoms", {"n_atoms": n_atoms})
    if n_experts < 2:
        raise InfeasibleConstraints("need at least 2 experts", {"n_experts": n_experts})
    if constraints.min_informed > n_experts:
        raise InfeasibleConstraints(
            "more informed experts requested than experts",
            {"min_informed": constraints.min_informed, "n_experts": n_experts},
        )

    rng = stream_rng(seed, Stream.SCENARIO)
    raw = rng.integers(1, MAX_ATOM_WEIGHT + 1, size=n_atoms)
    total = int(raw.sum())
    weights = [Fraction(int(w), total) for w in raw]
    atoms = [f"w{i}" for i in range(n_atoms)]
    true_atom = int(rng.choice(n_atoms, p=[float(w) for w in weights]))

    # H is a nonempty proper subset
    h = sorted(int(i) for i in np.flatnonzero(rng.random(n_atoms) < 0.5))
    if not h:
        h = [int(rng.integers(n_atoms))]
    elif len(h) == n_atoms:
        h.remove(int(rng.choice(h)))

    experts = []
    for n in range(n_experts):
        cells = _partition(rng, n_atoms, h, true_atom, constraints, informed=n < constraints.min_informed)
        experts.append(ExpertSpec(
            id=f"x{n}",
            partition=[[atoms[i] for i in cell] for cell in cells],
            policy=constraints.policy,
        ))

    return ScenarioConfig(
        name=f"random-{seed}",
        hypothesis=[atoms[i] for i in h],
        space=SpaceSpec(
            atoms=atoms,
            weights=[str(w) if constraints.rational else float(w) for w in weights],
            true_atom=atoms[true_atom],
            sample_true_atom=constraints.sample_true_atom,
        ),
        experts=experts,
        market=MarketSpec(mode=constraints.mode),
        numerics=NumericsSpec(rational=constraints.rational),
        run=RunSpec(seed=seed, entry_order="random"),
    )
