"""
Tests for network parsing, serialization, focal points and condition checks.

Usage:
    pytest test_network_service.py
"""
import json
from fractions import Fraction

import pytest

from backend.services.network_service import NetworkService
from shared.constants import CONDITION_FOCAL, CONDITION_UNIFORM_DECAY, CONDITION_WALLS
from shared.exceptions import SpecError
from shared.models import BoxLabel


def F(*values):
    return tuple(Fraction(v) for v in values)


def test_box_label_index_uses_first_variable_as_high_bit():
    a = BoxLabel.from_string("1000")
    assert a.index == 8
    assert BoxLabel.from_index(8, 4) == a
    assert str(a.flip(3)) == "1001"


def test_bad_bitstring_is_rejected():
    with pytest.raises(SpecError):
        BoxLabel.from_string("10a1")


def test_terms_are_expanded_into_the_truth_table(spec):
    assert spec.n == 4
    assert spec.name == "four-gene chaotic example"
    assert len(spec.gamma) == 16
    assert NetworkService.focal_point(spec, "1111").coords == F(1, -1, 1, -1)
    assert NetworkService.focal_point(spec, "1110").coords == F(1, -1, -1, -1)


def test_out_directions_of_the_starting_box(spec):
    plus, minus = NetworkService.out_directions(spec, "1111")
    assert plus == ()
    assert minus == (1, 3)
    assert NetworkService.exits(spec, "1110") == (1, 2)


def test_example_passes_all_conditions(spec):
    report = NetworkService.validate(spec)
    assert report.ok
    assert [e.condition for e in report.entries] == [CONDITION_FOCAL, CONDITION_WALLS, CONDITION_UNIFORM_DECAY]
    assert all(e.passed for e in report.entries)


def test_focal_point_on_threshold_is_reported_not_raised():
    spec = NetworkService.parse_network({
        "n": 2, "lambda": ["1", "1"],
        "gamma": {"00": ["1", "0"], "01": ["1", "-1"], "10": ["1", "1"], "11": ["-1", "1"]},
    })
    report = NetworkService.validate(spec)
    assert not report.ok
    offenders = [e.offender for e in report.failures() if e.condition == CONDITION_FOCAL]
    assert offenders == ["00"]


def test_black_wall_is_reported():
    # y1 flows up below its threshold and down above it
    spec = NetworkService.parse_network({
        "n": 1, "lambda": ["1"], "gamma": {"0": ["1"], "1": ["-1"]},
    })
    report = NetworkService.validate(spec)
    failures = [e for e in report.failures() if e.condition == CONDITION_WALLS]
    assert len(failures) == 1
    assert "black" in failures[0].detail
    with pytest.raises(SpecError):
        NetworkService.require_valid(spec)


def test_unequal_decay_is_informational():
    spec = NetworkService.parse_network({
        "n": 2, "lambda": ["1", "2"],
        "gamma": {"00": ["1", "-1"], "10": ["1", "1"], "11": ["-1", "1"], "01": ["-1", "-1"]},
    })
    report = NetworkService.validate(spec)
    assert report.ok
    assert not spec.uniform_decay
    with pytest.raises(SpecError, match="equal decay"):
        NetworkService.require_valid(spec, uniform_decay=True)


def test_incomplete_truth_table():
    with pytest.raises(SpecError, match="incomplete truth table"):
        NetworkService.parse_network({
            "n": 2, "lambda": ["1", "1"],
            "gamma": {"00": ["1", "-1"], "10": ["1", "1"], "11": ["-1", "1"]},
        })


@pytest.mark.parametrize("document", [
    {"n": 2, "lambda": ["1"], "gamma": {}},
    {"n": 1, "lambda": ["0"], "gamma": {"0": ["1"], "1": ["1"]}},
    {"n": 1, "lambda": ["1"]},
    {"n": 1, "lambda": ["1/x"], "gamma": {"0": ["1"], "1": ["1"]}},
])
def test_malformed_documents(document):
    with pytest.raises(SpecError):
        NetworkService.parse_network(document)


def test_invalid_json_text():
    with pytest.raises(SpecError, match="not valid JSON"):
        NetworkService.parse_network("{n: 4")


def test_serialized_spec_parses_back_to_the_same_network(spec):
    text = NetworkService.serialize_network(spec)
    data = json.loads(text)
    assert data["gamma"]["1111"] == ["1", "-1", "1", "-1"]
    assert data["trap"]["edge"] == "1111>1110"
    assert NetworkService.parse_network(text) == spec


def test_trap_block_is_parsed(spec):
    assert str(spec.trap.edge[0]) == "1111"
    labels = [label for label, _ in spec.trap.cycles]
    assert labels == ["A", "B"]
    assert len(dict(spec.trap.cycles)["B"]) == 10


def test_digest_ignores_name_but_not_dynamics(spec, ring_spec):
    renamed = NetworkService.parse_network(dict(json.loads(NetworkService.serialize_network(spec)), name="other"))
    assert renamed.digest() == spec.digest()
    assert ring_spec.digest() != spec.digest()


def test_package_exports_operations_by_name(spec):
    from backend import services

    assert services.focal_point(spec, "1111") == NetworkService.focal_point(spec, "1111")
    assert services.graph_entropy(services.build_tg(spec)) > 0
    assert "observed_words" in services.__all__
