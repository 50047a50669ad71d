"""
Shared fixtures
"""

from pathlib import Path

import pytest

from services.harness.middleware.logging import configure_logging
from services.harness.services.scenarios import bundled_scenario, load_scenario
from services.world.space import Partition, SampleSpace

GOLDEN_DIR = Path(__file__).parent / "golden"

configure_logging("WARNING", "console")


@pytest.fixture
def exm_space() -> SampleSpace:
    return SampleSpace.build(["h", "a", "b"], ["1/3", "1/3", "1/3"], "h")


@pytest.fixture
def exm_partitions(exm_space):
    s = exm_space
    return {
        "m": Partition.build(s, [s.event(["a"]), s.event(["h", "b"])]),
        "l": Partition.build(s, [s.event(["b"]), s.event(["h", "a"])]),
    }


@pytest.fixture
def exm():
    return load_scenario(bundled_scenario("exm"))


@pytest.fixture
def exm_prior():
    return load_scenario(bundled_scenario("exm_prior"))
