"""
Seeded Random Streams
Every consumer of randomness in a run draws from its own numpy stream,
derived from the run seed and a fixed stream id, so the order in which
components ask for numbers never changes what another component sees.
"""

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    ENTRY_ORDER = 1
    RESOLUTION = 2
    TRUE_STATE = 3
    SCENARIO = 4


def stream_rng(seed: int, stream: Stream) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream)]))


def stream_seed(seed: int, stream: Stream) -> int:
    """A plain integer seed for a stream, suitable for storing in records"""
    return int(np.random.SeedSequence([int(seed), int(stream)]).generate_state(1)[0])


def run_seeds(base_seed: int, n_runs: int) -> range:
    # counter scheme: run i of a batch uses base_seed + i
    return range(int(base_seed), int(base_seed) + int(n_runs))
