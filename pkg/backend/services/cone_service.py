"""
Cone service for exact returning cones on a starting wall.

Cones are kept in double description: inequality rows (wall orthant first)
and extremal rays. All arithmetic is exact; emptiness means empty interior.
"""
import logging
import math
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import cdd

from shared.constants import ERRORS
from shared.exceptions import ConeError, DenominatorSignError, SpecError
from shared.models import Cone, CycleWord, FracLinMap, NetworkSpec, TrappingReport, WallId
from shared import rational
from backend.services.network_service import NetworkService
from backend.services.dynamics_service import DynamicsService

logger = logging.getLogger('glassbound.cones')

NUMBER_TYPE = "fraction"


class ConeService:
    """Service for returning-cone computations."""

    @staticmethod
    def from_inequalities(wall: WallId, rows: Sequence[Sequence[Fraction]]) -> Cone:
        """
        Cone on a wall cut out by rows y >= 0 inside the wall orthant.

        Args:
            wall: Wall the cone lives on
            rows: Constraints in reduced wall coordinates, orthant excluded

        Returns:
            Cone with orthant rows prepended and extremal rays computed
        """
        d = wall.dimension
        rows = tuple(rational.vector(r) for r in rows)
        if any(len(r) != d for r in rows):
            raise ConeError(f"{ERRORS['DIMENSION_MISMATCH']}: rows must have {d} entries")
        rays = _double_description(d, wall.orthant_signs(), rows)
        return Cone(wall, wall.orthant_rows() + rows, tuple(rays))

    @staticmethod
    def alt_exit_rows(spec: NetworkSpec, path: CycleWord) -> rational.Matrix:
        """
        Rows forbidding every alternative exit along a wall path.

        For the k-th box and each exit i other than the one taken, the row is
        -e_i^T B_k...B_0 / f_i(k), pulled back to the starting wall with the
        wall's axis column deleted.

        Args:
            spec: Network specification
            path: Cycle word starting at the wall of its starting edge

        Returns:
            Primitive integer rows in path order
        """
        boxes = list(path.boxes)
        axes = DynamicsService.path_axes(spec, boxes, closed=True)
        start_axis = path.wall.axis
        product = rational.identity(spec.n)
        rows = []
        for a, j in zip(boxes, axes):
            beta = DynamicsService.local_map(spec, a, j).B
            step = rational.mat_mul(beta, product)
            f = NetworkService.focal_point(spec, a)
            for i in NetworkService.exits(spec, a):
                if i == j:
                    continue
                row = rational.scale(-1 / f[i], step[i])
                rows.append(rational.primitive(rational.delete_index(row, start_axis)))
            product = step
        return tuple(rows)

    @staticmethod
    def reduce_rows(R: Sequence[Sequence[Fraction]], wall: WallId) -> rational.Matrix:
        """
        Minimal subset of rows defining the same cone inside the wall orthant.

        Duplicates (up to positive scaling) and zero rows go first; for a
        full-dimensional cone a row survives when it supports a facet,
        otherwise rows are dropped greedily while the cone is unchanged.
        """
        d = wall.dimension
        unique = []
        for row in R:
            p = rational.primitive(row)
            if not rational.is_zero(p) and p not in unique:
                unique.append(p)
        if not unique:
            return ()
        signs = wall.orthant_signs()
        rays = _double_description(d, signs, unique)
        if rays and rational.rank(rays) == d:
            if d == 1:
                return ()
            return tuple(row for row in unique
                         if rational.rank([r for r in rays if rational.dot(row, r) == 0]) >= d - 1)
        kept = list(unique)
        for row in list(unique):
            others = [r for r in kept if r != row]
            trial = _double_description(d, signs, others)
            if _same_rays(trial, rays):
                kept = others
        return tuple(kept)

    @staticmethod
    def extremal_rays(cone: Cone) -> List[rational.Vector]:
        """
        Extremal rays, L1-normalized and sorted.
        """
        return list(_double_description(cone.dimension, cone.wall.orthant_signs(), cone.rows))

    @staticmethod
    def is_empty(cone: Cone) -> bool:
        """True when the cone has empty interior relative to its wall."""
        if not cone.rays:
            return True
        return rational.rank(cone.rays) < cone.dimension

    @staticmethod
    def map_cone(m: FracLinMap, cone: Cone, target_wall: Optional[WallId] = None) -> Cone:
        """
        Image of a cone under a fractional-linear map.

        Rays map to rays, so the image is generated by B r over the extremal
        rays r; its inequalities are regenerated from those rays.

        Args:
            m: Reduced map on the cone's wall coordinates
            cone: Cone inside the map's admissible set
            target_wall: Wall of the image (defaults to the cone's wall)

        Raises:
            DenominatorSignError: if 1 + psi.y is not positive on the whole cone
        """
        wall = target_wall or cone.wall
        if m.dimension != cone.dimension:
            raise ConeError(f"{ERRORS['DIMENSION_MISMATCH']}: map acts on {m.dimension} coordinates")
        images = []
        for r in cone.rays:
            if rational.dot(m.psi, r) < 0:
                raise DenominatorSignError(ERRORS["DENOMINATOR_SIGN"], {"ray": [str(x) for x in r]})
            image = rational.mat_vec(m.B, r)
            if not rational.is_zero(image):
                images.append(rational.l1_normalize(image))
        rows = _facets_from_rays(wall.dimension, images)
        return ConeService.from_inequalities(wall, ConeService.reduce_rows(rows, wall))

    @staticmethod
    def intersect(c1: Cone, c2: Cone) -> Cone:
        if c1.wall != c2.wall:
            raise ConeError(ERRORS["WALL_MISMATCH"])
        return ConeService.from_inequalities(c1.wall, ConeService.reduce_rows(c1.rows + c2.rows, c1.wall))

    @staticmethod
    def contains(container: Cone, target: Cone) -> bool:
        """Single-cone containment: every ray of target satisfies container."""
        if container.wall != target.wall:
            raise ConeError(ERRORS["WALL_MISMATCH"])
        return all(container.contains_point(r) for r in target.rays)

    @staticmethod
    def union_contains(container: Sequence[Cone], target: Cone) -> bool:
        """
        Whether target lies inside the union of container cones.

        Decided by recursive splitting of target along violated facets;
        pieces with empty interior count as covered.

        Raises:
            ConeError: if the cones lie on different walls
        """
        return ConeService.uncovered_piece(container, target) is None

    @staticmethod
    def uncovered_piece(container: Sequence[Cone], target: Cone) -> Optional[Cone]:
        """A full-dimensional piece of target outside every container cone, if any."""
        container = list(container)
        if any(c.wall != target.wall for c in container):
            raise ConeError(ERRORS["WALL_MISMATCH"])
        return _uncovered(target.wall, list(target.rows), container)

    @staticmethod
    def returning_region(spec: NetworkSpec, word: CycleWord) -> Cone:
        """
        Starting-wall cone of points that follow word exactly.

        Args:
            spec: Network with equal decay rates
            word: Cycle or concatenation of cycles

        Returns:
            Cone with reduced alternative-exit rows
        """
        if not spec.uniform_decay:
            raise SpecError(ERRORS["UNEQUAL_DECAY"])
        rows = ConeService.alt_exit_rows(spec, word)
        return ConeService.from_inequalities(word.wall, ConeService.reduce_rows(rows, word.wall))

    @staticmethod
    def verify_trapping(spec: NetworkSpec, starting_edge, cycles: Sequence[CycleWord]) -> TrappingReport:
        """
        Check that the active cycles' cones map into their union.

        Args:
            spec: Network with equal decay rates
            starting_edge: Edge shared by all cycles
            cycles: Candidate cycle set

        Returns:
            TrappingReport with empty, transient and active cycles classified
        """
        starting_edge = tuple(starting_edge)
        for c in cycles:
            if tuple(c.starting_edge) != starting_edge:
                raise SpecError(f"cycle {c.label} does not start with the shared starting edge")
        cones = {c.label: ConeService.returning_region(spec, c) for c in cycles}
        empty = tuple(c for c in cycles if ConeService.is_empty(cones[c.label]))
        nonempty = [c for c in cycles if c not in empty]
        maps = {c.label: DynamicsService.cycle_map(spec, c) for c in nonempty}
        transient = tuple(ConeService.transient_words(spec, 1, nonempty, cones, maps))
        active = [c for c in nonempty if c not in transient]

        witnesses = {c.label: ConeService.map_cone(maps[c.label], cones[c.label]) for c in active}
        active_cones = [cones[c.label] for c in active]
        escapes = tuple(c.label for c in active
                        if not ConeService.union_contains(active_cones, witnesses[c.label]))
        verified = bool(active) and not escapes
        logger.info(f"Trapping check on {len(cycles)} cycles: {len(empty)} empty, "
                    f"{len(transient)} transient, verified={verified}")
        return TrappingReport(starting_edge, tuple(cycles), verified, transient, empty,
                              cones, witnesses, escapes)

    @staticmethod
    def transient_words(spec: NetworkSpec, k: int, words: Sequence[CycleWord],
                        cones: Optional[Dict[str, Cone]] = None,
                        maps: Optional[Dict[str, FracLinMap]] = None) -> List[CycleWord]:
        """
        Words whose cones no admissible predecessor maps into.

        A predecessor u of w has u's last k-1 cycles equal to w's first k-1;
        for k = 1 every word is a predecessor. w is transient when each
        predecessor's image M_{u_1}(R_u) meets R_w in an empty interior,
        iterated until no new word is removed.

        Args:
            spec: Network specification
            k: Word length in cycles
            words: Nonempty words of length k
            cones: Precomputed cones by word label
            maps: Cycle maps by single-cycle label (computed from words when k = 1)

        Returns:
            Transient words in input order
        """
        words = list(words)
        cones = dict(cones or {})
        for w in words:
            if w.label not in cones:
                cones[w.label] = ConeService.returning_region(spec, w)
        maps = dict(maps or {})
        if k == 1:
            for w in words:
                if w.label not in maps:
                    maps[w.label] = DynamicsService.cycle_map(spec, w)

        images = {}
        for u in words:
            first = u.parts[0]
            if first not in maps:
                raise ConeError(f"no cycle map for {first}")
            images[u.label] = ConeService.map_cone(maps[first], cones[u.label])

        feeders = {}
        for w in words:
            feeders[w.label] = set()
            for u in words:
                if k > 1 and u.parts[1:] != w.parts[:-1]:
                    continue
                overlap = ConeService.intersect(images[u.label], cones[w.label])
                if not ConeService.is_empty(overlap):
                    feeders[w.label].add(u.label)

        removed = set()
        changed = True
        while changed:
            changed = False
            for w in words:
                if w.label not in removed and not (feeders[w.label] - removed):
                    removed.add(w.label)
                    changed = True
        if removed:
            logger.info(f"Transient words at k={k}: {sorted(removed)}")
        return [w for w in words if w.label in removed]

    @staticmethod
    def cycle_tubes(report: TrappingReport):
        """(cycle, cone) pairs of the active cycles."""
        return [(c, report.cones[c.label]) for c in report.active]

    @staticmethod
    def stable_loop(report: TrappingReport) -> bool:
        """Whether the trapping region collapses to a single active cycle."""
        return report.verified and len(report.active) == 1

    @staticmethod
    def word(report: TrappingReport, text: str) -> CycleWord:
        """Concatenation named by a string of single-character cycle labels."""
        if not text:
            raise SpecError("empty cycle word")
        return CycleWord.concat([report.cycle(ch) for ch in text])

    @staticmethod
    def word_report(spec: NetworkSpec, report: TrappingReport, text: str) -> dict:
        """Emptiness, reduced rows and rays of a named concatenation."""
        cone = ConeService.returning_region(spec, ConeService.word(report, text))
        return {
            "word": text,
            "empty": ConeService.is_empty(cone),
            "rows": [list(r) for r in cone.rows],
            "rays": [list(r) for r in cone.rays],
        }

    @staticmethod
    def cross_section(cone: Cone) -> List[tuple]:
        """First two coordinates of the normalized rays, ordered around the polygon."""
        points = [(r[0], r[1] if cone.dimension > 1 else Fraction(0)) for r in cone.rays]
        if len(points) < 3:
            return points
        cx = sum(float(p[0]) for p in points) / len(points)
        cy = sum(float(p[1]) for p in points) / len(points)
        return sorted(points, key=lambda p: math.atan2(float(p[1]) - cy, float(p[0]) - cx))


def _double_description(d, signs, rows) -> List[rational.Vector]:
    """Extremal rays of {y : s_j y_j >= 0, rows y >= 0}, L1-normalized and sorted.

    The H-representation goes to cdd with rows [0, a] for a.y >= 0; the
    origin vertex cdd reports for a pointed cone is skipped.
    """
    if d == 0:
        return []
    H = cdd.Matrix([[0] + list(rational.unit(d, j, s)) for j, s in enumerate(signs)],
                   number_type=NUMBER_TYPE)
    if rows:
        H.extend([[0] + list(h) for h in rows])
    H.rep_type = cdd.RepType.INEQUALITY
    V = cdd.Polyhedron(H).get_generators()
    rays = set()
    for i in range(V.row_size):
        row = V[i]
        if row[0] != 0:
            continue
        ray = rational.vector(row[1:])
        if rational.is_zero(ray):
            continue
        rays.add(rational.l1_normalize(ray))
        if i in V.lin_set:
            rays.add(rational.l1_normalize(rational.scale(-1, ray)))
    return sorted(rays)


def _facets_from_rays(d, rays) -> List[rational.Vector]:
    """Inequality rows of the cone generated by rays.

    Equalities cdd reports for a lower-dimensional span enter as row pairs.
    """
    if not rays:
        return [rational.unit(d, j, -1) for j in range(d)] + [rational.unit(d, j, 1) for j in range(d)]
    V = cdd.Matrix([[1] + [0] * d] + [[0] + list(r) for r in rays], number_type=NUMBER_TYPE)
    V.rep_type = cdd.RepType.GENERATOR
    H = cdd.Polyhedron(V).get_inequalities()
    rows = []
    for i in range(H.row_size):
        a = rational.vector(H[i][1:])
        if rational.is_zero(a):
            continue
        rows.append(a)
        if i in H.lin_set:
            rows.append(rational.scale(-1, a))
    return rows


def _same_rays(a, b) -> bool:
    return sorted(a) == sorted(b)


def _uncovered(wall, piece_rows, containers) -> Optional[Cone]:
    piece = ConeService.from_inequalities(wall, piece_rows)
    if ConeService.is_empty(piece):
        return None
    if not containers:
        return piece
    first = containers[0]
    violated = [h for h in first.ineqs if any(rational.dot(h, r) < 0 for r in piece.rays)]
    if not violated:
        return None
    h = violated[0]
    inside = _uncovered(wall, piece_rows + [h], containers)
    if inside is not None:
        return inside
    return _uncovered(wall, piece_rows + [rational.scale(-1, h)], containers[1:])
