"""
Tests for returning cones, cone images and the trapping check.

Usage:
    pytest test_cone_service.py
"""
from collections import Counter
from fractions import Fraction
from itertools import combinations, product

import numpy as np
import pytest
from scipy.optimize import linprog

from backend.services.cone_service import ConeService
from backend.services.dynamics_service import DynamicsService
from shared.exceptions import ConeError, DenominatorSignError, SpecError
from shared.models import BoxLabel, CycleWord, FracLinMap, WallId
from shared import rational


def F(*values):
    return tuple(Fraction(v) for v in values)


def has_interior(wall, rows):
    """LP oracle: some y is strictly inside every nonzero constraint."""
    constraints = [r for r in wall.orthant_rows() + tuple(rows) if not rational.is_zero(r)]
    a = -np.array([[float(x) for x in r] for r in constraints])
    result = linprog(np.zeros(wall.dimension), A_ub=a, b_ub=-np.ones(len(constraints)),
                     bounds=[(None, None)] * wall.dimension, method="highs")
    return result.status == 0


def test_alternative_exit_rows_of_cycle_a(spec, cycle_a):
    rows = ConeService.alt_exit_rows(spec, cycle_a)
    expected = [F(0, -1, 1), F(-1, -2, 1), F(2, 4, -1), F(2, 4, -1),
                F(-3, -8, 4), F(-2, -5, 2), F(-2, -5, 2)]
    assert Counter(rows) == Counter(expected)


def test_reduced_rows(spec, cycle_a, cycle_b):
    ra = ConeService.reduce_rows(ConeService.alt_exit_rows(spec, cycle_a), cycle_a.wall)
    rb = ConeService.reduce_rows(ConeService.alt_exit_rows(spec, cycle_b), cycle_b.wall)
    assert sorted(ra) == sorted([F(2, 4, -1), F(-2, -5, 2)])
    assert sorted(rb) == sorted([F(6, 11, -2), F(-2, -4, 1)])


def test_reduce_rows_drops_duplicates_and_zero_rows(cycle_a):
    rows = [F(2, 4, -1), F(4, 8, -2), F(0, 0, 0), F(-2, -5, 2)]
    assert sorted(ConeService.reduce_rows(rows, cycle_a.wall)) == sorted([F(2, 4, -1), F(-2, -5, 2)])


def test_reduce_rows_on_a_flat_cone_keeps_the_same_cone(cycle_a):
    # y1 = y2 inside the positive orthant
    rows = [F(1, -1, 0), F(-1, 1, 0), F(0, 1, -1), F(1, 0, -1)]
    reduced = ConeService.reduce_rows(rows, cycle_a.wall)
    assert len(reduced) < len(rows)
    before = ConeService.from_inequalities(cycle_a.wall, rows)
    after = ConeService.from_inequalities(cycle_a.wall, reduced)
    assert sorted(before.rays) == sorted(after.rays)
    assert ConeService.is_empty(before)


def test_extremal_rays_of_the_cycle_cones(trap):
    assert set(trap.cones["A"].rays) == {F(0, "2/7", "5/7"), F("1/2", 0, "1/2"),
                                         F("1/3", 0, "2/3"), F(0, "1/5", "4/5")}
    assert set(trap.cones["B"].rays) == {F(0, "2/13", "11/13"), F("1/4", 0, "3/4"),
                                         F("1/3", 0, "2/3"), F(0, "1/5", "4/5")}
    assert ConeService.extremal_rays(trap.cones["A"]) == list(trap.cones["A"].rays)


@pytest.mark.parametrize("text,empty", [
    ("AA", False), ("AB", False), ("BA", False), ("BB", True), ("BAAB", False),
])
def test_word_emptiness(spec, trap, text, empty):
    cone = ConeService.returning_region(spec, ConeService.word(trap, text))
    assert ConeService.is_empty(cone) is empty


def test_emptiness_agrees_with_linear_programming(spec, trap):
    for length in (1, 2, 3):
        for letters in product("AB", repeat=length):
            word = ConeService.word(trap, "".join(letters))
            rows = ConeService.alt_exit_rows(spec, word)
            cone = ConeService.returning_region(spec, word)
            assert ConeService.is_empty(cone) is not has_interior(word.wall, rows), word.label


def test_word_report(spec, trap):
    data = ConeService.word_report(spec, trap, "BB")
    assert data["word"] == "BB"
    assert data["empty"]
    with pytest.raises(SpecError):
        ConeService.word(trap, "")
    with pytest.raises(SpecError, match="unknown cycle label"):
        ConeService.word(trap, "AC")


def test_cone_images_and_union_containment(spec, trap, cycle_b):
    m_b = DynamicsService.cycle_map(spec, cycle_b)
    image = ConeService.map_cone(m_b, trap.cones["B"])
    assert not ConeService.union_contains([trap.cones["B"]], image)
    assert ConeService.union_contains([trap.cones["A"]], image)
    assert ConeService.union_contains([trap.cones["A"], trap.cones["B"]], image)
    piece = ConeService.uncovered_piece([trap.cones["B"]], image)
    assert piece is not None and not ConeService.is_empty(piece)


def test_contains_is_reflexive(trap):
    cone = trap.cones["A"]
    assert ConeService.contains(cone, cone)
    assert ConeService.union_contains([cone], cone)


def test_map_cone_rejects_a_negative_denominator(trap):
    m = FracLinMap(rational.identity(3), F(-1, 0, 0))
    with pytest.raises(DenominatorSignError):
        ConeService.map_cone(m, trap.cones["A"])


def test_cones_on_different_walls_are_rejected(trap):
    other = WallId.between(BoxLabel.from_string("1110"), BoxLabel.from_string("1111"))
    cone = ConeService.from_inequalities(other, [])
    with pytest.raises(ConeError):
        ConeService.union_contains([trap.cones["A"]], cone)
    with pytest.raises(ConeError):
        ConeService.intersect(trap.cones["A"], cone)


def test_example_trapping_region_is_verified(trap):
    assert trap.verified
    assert trap.empty == ()
    assert trap.transient == ()
    assert [c.label for c in trap.active] == ["A", "B"]
    assert trap.escapes == ()
    assert not ConeService.stable_loop(trap)
    tubes = ConeService.cycle_tubes(trap)
    assert [(c.label, cone) for c, cone in tubes] == [("A", trap.cones["A"]), ("B", trap.cones["B"])]


def test_single_cycle_b_is_transient(spec, edge, cycle_b):
    report = ConeService.verify_trapping(spec, edge, [cycle_b])
    assert not report.verified
    assert [c.label for c in report.transient] == ["B"]


def test_cycle_a_alone_escapes(spec, edge, cycle_a):
    report = ConeService.verify_trapping(spec, edge, [cycle_a])
    assert not report.verified
    assert report.transient == ()
    assert [c.label for c in report.active] == ["A"]
    assert report.escapes == ("A",)


def test_always_empty_cycle_lands_in_f1(spec, edge, trap, cycle_a, cycle_b):
    bb = CycleWord.concat([cycle_b, cycle_b])
    report = ConeService.verify_trapping(spec, edge, [cycle_a, cycle_b, bb])
    assert [c.label for c in report.empty] == ["BB"]
    assert report.verified
    assert [c.label for c in report.active] == ["A", "B"]
    assert report.escapes == ()
    assert report.witnesses == trap.witnesses


def test_cycles_must_share_the_starting_edge(spec, edge, ring_cycle):
    with pytest.raises(SpecError, match="shared starting edge"):
        ConeService.verify_trapping(spec, edge, [ring_cycle])


def test_ring_collapses_to_a_stable_loop(ring_spec, ring_cycle):
    report = ConeService.verify_trapping(ring_spec, ring_cycle.starting_edge, [ring_cycle])
    assert report.verified
    assert ConeService.stable_loop(report)
    assert report.cones["A"].rays == (F(-1),)


def test_transient_words_at_length_two(spec, trap):
    words = [ConeService.word(trap, w) for w in ("AA", "AB", "BA")]
    maps = {c.label: DynamicsService.cycle_map(spec, c) for c in trap.active}
    assert ConeService.transient_words(spec, 2, words, maps=maps) == []


def test_concatenated_word_follows_both_cycles(trap, cycle_a, cycle_b):
    word = ConeService.word(trap, "AB")
    assert word.parts == ("A", "B")
    assert word.boxes == cycle_a.boxes + cycle_b.boxes
    assert isinstance(word, CycleWord)


def test_cross_section_of_a_cone(trap):
    points = ConeService.cross_section(trap.cones["A"])
    assert len(points) == 4
    assert set(points) == {(r[0], r[1]) for r in trap.cones["A"].rays}


@pytest.fixture(scope="module")
def word_cones(spec, trap):
    return {"".join(letters): ConeService.returning_region(spec, ConeService.word(trap, "".join(letters)))
            for length in (1, 2, 3) for letters in product("AB", repeat=length)}


@pytest.mark.parametrize("k", [1, 2, 3])
def test_k_cones_partition_the_cycle_cones(trap, word_cones, k):
    level = {w: c for w, c in word_cones.items() if len(w) == k and not ConeService.is_empty(c)}
    for (u, cu), (w, cw) in combinations(sorted(level.items()), 2):
        assert ConeService.is_empty(ConeService.intersect(cu, cw)), (u, w)
    for first in ("A", "B"):
        pieces = [c for w, c in level.items() if w[0] == first]
        assert ConeService.union_contains(pieces, trap.cones[first]), first


def test_extending_a_word_shrinks_its_cone(word_cones):
    for w, cone in word_cones.items():
        for cut in range(1, len(w)):
            assert ConeService.contains(word_cones[w[:cut]], cone), w


def test_rays_and_facets_regenerate_each_other(word_cones):
    identity = FracLinMap(rational.identity(3), F(0, 0, 0))
    for w, cone in word_cones.items():
        if ConeService.is_empty(cone):
            continue
        again = ConeService.map_cone(identity, cone)
        assert again.rays == cone.rays, w
        assert ConeService.contains(cone, again) and ConeService.contains(again, cone), w
        rebuilt = ConeService.from_inequalities(cone.wall, cone.rows)
        assert rebuilt.rays == cone.rays, w
