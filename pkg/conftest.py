"""
Shared pytest fixtures for glassbound.

The example network is the bundled four-variable chaotic network with its
two first-return cycles A and B through 1111>1110. The ring network is a
two-variable negative feedback loop whose only cycle is a stable period-4
orbit.
"""
import os

import pytest

from backend.services.cone_service import ConeService
from backend.services.network_service import NetworkService
from shared.models import BoxLabel, CycleWord, parse_edge

FIXTURE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")
EXAMPLE_PATH = os.path.join(FIXTURE_DIR, "glass_example.json")

CYCLE_A = ["1110", "1010", "0010", "0000", "0100", "0110", "0111", "1111"]
CYCLE_B = ["1110", "1010", "0010", "0011", "0001", "0000", "0100", "0101", "0111", "1111"]

RING_DOCUMENT = {
    "n": 2,
    "lambda": ["1", "1"],
    "terms": [
        {"offset": "-1", "products": [{"coeff": "2", "literals": ["Y2'"]}]},
        {"offset": "-1", "products": [{"coeff": "2", "literals": ["Y1"]}]},
    ],
    "trap": {"edge": "01>00", "cycles": {"A": ["00", "10", "11", "01"]}},
}


def pytest_collection_modifyitems(config, items):
    if os.getenv("GLASSBOUND_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set GLASSBOUND_SLOW=1 to run desk-scale simulations")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def example_path():
    return EXAMPLE_PATH


@pytest.fixture(scope="session")
def spec():
    return NetworkService.load_network(EXAMPLE_PATH)


@pytest.fixture(scope="session")
def edge():
    return parse_edge("1111>1110", 4)


def make_cycle(boxes, label, edge_text="1111>1110"):
    n = len(boxes[0])
    return CycleWord(tuple(BoxLabel.from_string(b, n) for b in boxes), parse_edge(edge_text, n), label)


@pytest.fixture(scope="session")
def cycle_a():
    return make_cycle(CYCLE_A, "A")


@pytest.fixture(scope="session")
def cycle_b():
    return make_cycle(CYCLE_B, "B")


@pytest.fixture(scope="session")
def trap(spec, edge, cycle_a, cycle_b):
    return ConeService.verify_trapping(spec, edge, [cycle_a, cycle_b])


@pytest.fixture(scope="session")
def ring_spec():
    return NetworkService.parse_network(RING_DOCUMENT)


@pytest.fixture(scope="session")
def ring_cycle():
    return make_cycle(["00", "10", "11", "01"], "A", "01>00")
