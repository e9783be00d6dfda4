"""
Dynamics service for exact wall-to-wall maps and the wall-to-wall simulator.

Within a box the flow contracts toward the focal point, so the map from an
entry wall to an exit wall is fractional linear. Exact maps use Fractions;
the simulator runs the same maps in floats with L1 renormalization.
"""
import logging
import math
from fractions import Fraction
from typing import List, Sequence

import numpy as np

from shared.config import config
from shared.constants import ERRORS
from shared.exceptions import CodimensionTwoHit, ConeError, SpecError, TerminalBox
from shared.models import BoxLabel, Cone, CycleWord, FracLinMap, NetworkSpec, Trajectory, WallId, WallPoint
from shared import rational
from backend.services.network_service import NetworkService

logger = logging.getLogger('glassbound.dynamics')


class DynamicsService:
    """Service for wall maps, exit times and simulation."""

    @staticmethod
    def local_map(spec: NetworkSpec, a, exit_axis: int) -> FracLinMap:
        """
        Wall map of box a leaving along exit_axis.

        Args:
            spec: Network specification
            a: Box label
            exit_axis: 0-based exit axis j

        Returns:
            FracLinMap with B = I - f e_j^T / f_j and psi = -e_j / f_j
        """
        a = NetworkService.box(spec, a)
        if exit_axis not in NetworkService.exits(spec, a):
            raise SpecError(f"{ERRORS['NOT_AN_EXIT']}: axis {exit_axis + 1} of box {a}")
        f = NetworkService.focal_point(spec, a).coords
        n = spec.n
        f_j = f[exit_axis]
        B = tuple(
            tuple((Fraction(1) if r == c else Fraction(0)) - (f[r] / f_j if c == exit_axis else 0)
                  for c in range(n))
            for r in range(n)
        )
        psi = rational.unit(n, exit_axis, -1 / f_j)
        return FracLinMap(B, psi, exit_axis)

    @staticmethod
    def compose(maps: Sequence[FracLinMap]) -> FracLinMap:
        """
        Compose maps applied in list order.

        Returns:
            FracLinMap with B = B_{m-1}...B_0 and psi = psi_0 + sum_k (B_{k-1}...B_0)^T psi_k
        """
        maps = list(maps)
        if not maps:
            raise ValueError("compose needs at least one map")
        result = maps[0]
        for m in maps[1:]:
            B = rational.mat_mul(m.B, result.B)
            psi = rational.add(result.psi, rational.vec_mat(m.psi, result.B))
            result = FracLinMap(B, psi, m.exit_axis)
        return result

    @staticmethod
    def path_axes(spec: NetworkSpec, boxes: Sequence[BoxLabel], closed=True) -> List[int]:
        """
        Axes crossed along a box path, checking every transition is a TG edge.

        Args:
            spec: Network specification
            boxes: Box path
            closed: Whether the path returns from its last box to its first

        Returns:
            One exit axis per transition
        """
        boxes = [NetworkService.box(spec, b) for b in boxes]
        steps = len(boxes) if closed else len(boxes) - 1
        axes = []
        for k in range(steps):
            a, b = boxes[k], boxes[(k + 1) % len(boxes)]
            diff = [i for i in range(spec.n) if a.bits[i] != b.bits[i]]
            if len(diff) != 1 or diff[0] not in NetworkService.exits(spec, a):
                raise SpecError(f"{ERRORS['NOT_AN_EDGE']}: {a}>{b}", {"position": k})
            axes.append(diff[0])
        return axes

    @staticmethod
    def cycle_map(spec: NetworkSpec, cycle: CycleWord) -> FracLinMap:
        """
        Return map of a closed cycle word, reduced to starting-wall coordinates.

        Args:
            spec: Network specification
            cycle: Cycle or concatenation of cycles

        Returns:
            FracLinMap on the (n-1) wall coordinates
        """
        boxes = list(cycle.boxes)
        if not boxes or (boxes[-1], boxes[0]) != tuple(cycle.starting_edge):
            raise SpecError(f"{ERRORS['PATH_NOT_CLOSED']}: {cycle.label}")
        axes = DynamicsService.path_axes(spec, boxes, closed=True)
        maps = [DynamicsService.local_map(spec, a, j) for a, j in zip(boxes, axes)]
        composite = DynamicsService.compose(maps)
        return composite.reduce(cycle.wall.axis)

    @staticmethod
    def exit_time(spec: NetworkSpec, a, y0, i: int) -> float:
        """
        Time for coordinate i to reach its threshold from y0 inside box a.

        Args:
            spec: Network specification
            a: Box label
            y0: Point in the box or on one of its entry walls
            i: 0-based exit axis

        Returns:
            tau_i = (1/lambda_i) ln((f_i - y0_i) / f_i)
        """
        a = NetworkService.box(spec, a)
        if i not in NetworkService.exits(spec, a):
            raise SpecError(f"{ERRORS['NOT_AN_EXIT']}: axis {i + 1} of box {a}")
        f_i = NetworkService.focal_point(spec, a)[i]
        ratio = (f_i - y0[i]) / f_i
        return math.log(float(ratio)) / float(spec.decay[i])

    @staticmethod
    def exit_wall(spec: NetworkSpec, a, y0):
        """
        Exit axis with the smallest exit time.

        Returns:
            (axis, tau)
        """
        a = NetworkService.box(spec, a)
        exits = NetworkService.exits(spec, a)
        if not exits:
            raise TerminalBox(f"box {a} is terminal", box=a)
        times = sorted((DynamicsService.exit_time(spec, a, y0, i), i) for i in exits)
        return times[0][1], times[0][0]

    @staticmethod
    def step(spec: NetworkSpec, p: WallPoint, exact=False, normalize=True, step_index=None) -> WallPoint:
        """
        Map a wall point to the wall where the trajectory leaves the box it enters.

        Args:
            spec: Network specification
            p: Point on the entry wall of box p.wall.to_box
            exact: Use exact rationals and exact tie detection
            normalize: Rescale to unit L1 norm (equal decay only)
            step_index: Index reported on a codimension-2 hit

        Returns:
            WallPoint on the exit wall
        """
        a = p.wall.to_box
        exits = NetworkService.exits(spec, a)
        if not exits:
            raise TerminalBox(f"box {a} is terminal", box=a)
        f = NetworkService.focal_point(spec, a).coords
        if exact:
            if not spec.uniform_decay:
                raise SpecError(ERRORS["UNEQUAL_DECAY"])
            y = tuple(Fraction(v) for v in p.y)
            ratios = sorted(((1 - y[i] / f[i]), i) for i in exits)
            if len(ratios) > 1 and ratios[0][0] == ratios[1][0]:
                raise CodimensionTwoHit(f"tie between axes {ratios[0][1] + 1} and {ratios[1][1] + 1}",
                                        step_index, (ratios[0][1], ratios[1][1]))
            r, j = ratios[0]
            y_new = [f[i] + (y[i] - f[i]) / r for i in range(spec.n)]
            y_new[j] = Fraction(0)
            if normalize:
                y_new = list(rational.l1_normalize(y_new))
        else:
            y = [float(v) for v in p.y]
            ff = [float(v) for v in f]
            lam = [float(v) for v in spec.decay]
            times = sorted((math.log(1.0 - y[i] / ff[i]) / lam[i], i) for i in exits)
            _check_tie(times, step_index)
            tau, j = times[0]
            y_new = [ff[i] + (y[i] - ff[i]) * math.exp(-lam[i] * tau) for i in range(spec.n)]
            y_new[j] = 0.0
            if normalize and spec.uniform_decay:
                total = sum(abs(v) for v in y_new)
                y_new = [v / total for v in y_new]
        return WallPoint(WallId(a, a.flip(j), j, 1 if a.bits[j] == 0 else -1), tuple(y_new))

    @staticmethod
    def simulate(spec: NetworkSpec, start, steps: int, seed=None, exact=False) -> Trajectory:
        """
        Run the wall-to-wall map from a start point.

        Args:
            spec: Validated network specification
            start: WallPoint, or a list of Cones to sample a start from
            steps: Number of transitions
            seed: Seed for sampling the start when cones are given
            exact: Step with exact rationals

        Returns:
            Trajectory of traversed boxes; a terminal box ends it early

        Raises:
            CodimensionTwoHit: with the index of the offending step
        """
        if not isinstance(start, WallPoint):
            start = DynamicsService.sample_start(spec, start, seed)
        dtype = np.uint16 if spec.n <= 16 else np.uint32
        symbols = np.zeros(steps, dtype=dtype)
        if exact:
            p = start
            for t in range(steps):
                symbols[t] = p.wall.to_box.index
                try:
                    p = DynamicsService.step(spec, p, exact=True, step_index=t)
                except TerminalBox:
                    logger.info(f"Trajectory reached terminal box {p.wall.to_box} at step {t}")
                    return Trajectory(symbols[:t + 1], spec.n, p, terminal=True)
            return Trajectory(symbols, spec.n, p)
        return _simulate_float(spec, start, steps, symbols)

    @staticmethod
    def sample_start(spec: NetworkSpec, cones: Sequence[Cone], seed=None) -> WallPoint:
        """
        Sample a start point uniformly from the unit cross-section of a union of cones.

        Rejection sampling in the bounding box of the cones' normalized rays.

        Args:
            spec: Network specification
            cones: Nonempty cones on one wall
            seed: Seed for numpy's default generator

        Returns:
            WallPoint with float coordinates
        """
        cones = [c for c in cones if c.rays]
        if not cones:
            raise ConeError("cannot sample a start point from empty cones")
        wall = cones[0].wall
        if any(c.wall != wall for c in cones):
            raise ConeError(ERRORS["WALL_MISMATCH"])
        d = wall.dimension
        signs = np.array(wall.orthant_signs(), dtype=float)
        rays = np.array([[float(x) for x in r] for c in cones for r in c.rays])
        lo, hi = rays.min(axis=0), rays.max(axis=0)
        ineqs = [np.array([[float(x) for x in row] for row in c.ineqs]) for c in cones]
        rng = np.random.default_rng(seed)
        for _ in range(1000000):
            head = rng.uniform(lo[:-1], hi[:-1]) if d > 1 else np.zeros(0)
            last = signs[-1] * (1.0 - np.abs(head).sum())
            y = np.append(head, last)
            if not lo[-1] <= last <= hi[-1]:
                continue
            if any(np.all(m @ y > 0) for m in ineqs):
                full = rational.insert_zero(tuple(float(v) for v in y), wall.axis)
                return WallPoint(wall, tuple(float(v) for v in full))
        raise ConeError("no start point found in the cones' cross-section")

    @staticmethod
    def cone_point(cone: Cone) -> WallPoint:
        """Exact interior point of a cone: the normalized sum of its rays."""
        if not cone.rays:
            raise ConeError("empty cone has no interior point")
        total = tuple(sum(col, Fraction(0)) for col in zip(*cone.rays))
        y = rational.l1_normalize(total)
        return WallPoint(cone.wall, rational.insert_zero(y, cone.wall.axis))


def _check_tie(times, step_index):
    if len(times) > 1:
        (t0, i0), (t1, i1) = times[0], times[1]
        if t1 - t0 <= config.TIE_TOL * max(t1, 0.0):
            raise CodimensionTwoHit(f"tie between axes {i0 + 1} and {i1 + 1}", step_index, (i0, i1))


def _simulate_float(spec, start, steps, symbols):
    """Float simulation loop over precomputed per-box tables."""
    n = spec.n
    boxes = spec.boxes()
    focal = [[float(v) for v in NetworkService.focal_point(spec, a).coords] for a in boxes]
    exits = [NetworkService.exits(spec, a) for a in boxes]
    lam = [float(v) for v in spec.decay]
    uniform = spec.uniform_decay
    tie_tol = config.TIE_TOL
    log, exp = math.log, math.exp

    y = [float(v) for v in start.y]
    box = start.wall.to_box.index
    elapsed = 0.0
    last_axis = start.wall.axis
    for t in range(steps):
        symbols[t] = box
        ex = exits[box]
        if not ex:
            logger.info(f"Trajectory reached terminal box {boxes[box]} at step {t}")
            return Trajectory(symbols[:t + 1], n, WallPoint(_wall_into(boxes, box, last_axis), tuple(y)),
                              terminal=True, elapsed=elapsed)
        f = focal[box]
        if len(ex) == 1:
            j = ex[0]
            tau = log(1.0 - y[j] / f[j]) / lam[j]
        else:
            tau, j = math.inf, -1
            second = math.inf
            for i in ex:
                t_i = log(1.0 - y[i] / f[i]) / lam[i]
                if t_i < tau:
                    second, tau, prev = tau, t_i, j
                    j = i
                elif t_i < second:
                    second, prev = t_i, i
            if second - tau <= tie_tol * max(second, 0.0):
                raise CodimensionTwoHit(f"tie between axes {j + 1} and {prev + 1}", t, (j, prev))
        if uniform:
            factor = exp(-lam[0] * tau)
            y = [f[i] + (y[i] - f[i]) * factor for i in range(n)]
            y[j] = 0.0
            total = 0.0
            for v in y:
                total += v if v > 0 else -v
            y = [v / total for v in y]
        else:
            y = [f[i] + (y[i] - f[i]) * exp(-lam[i] * tau) for i in range(n)]
            y[j] = 0.0
        elapsed += tau
        box ^= 1 << (n - 1 - j)
        last_axis = j
    return Trajectory(symbols, n, WallPoint(_wall_into(boxes, box, last_axis), tuple(y)), elapsed=elapsed)


def _wall_into(boxes, box, axis):
    """Wall through which box was entered along axis."""
    to_box = boxes[box]
    from_box = to_box.flip(axis)
    return WallId(from_box, to_box, axis, 1 if to_box.bits[axis] else -1)
