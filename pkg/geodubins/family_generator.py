"""
Explicit families of curves parametrized by R^{n_Q}: control circles, connecting segments and the family map
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings
from scipy.optimize import brentq

from .arcs_curves import OrientedArc, PiecewiseArcCurve
from .config_index import index_numbers
from .dubins import shortest_csc
from .exceptions import ContractError, InfeasibleError, InvalidInputError
from .sphere_core import (
    E3, IDENTITY, TWO_PI, angle_about, check_rotation, circle_intersections, frame_deviation, longitude,
    normalize, rotation_about_axis, wrap_angle,
)
from .workers import parallel_map

logger = logging.getLogger(__name__)

SWEEP_SNAP = 1e-10
THRESHOLD_GRID = 256


@dataclass
class FamilyParams:
    Q: np.ndarray
    rho0: float
    rho_tilde: float
    n_q: int
    varsigma: float
    delta0: float

    @classmethod
    def from_configuration(cls, Q, rho0: float, rho_tilde: Optional[float] = None) -> 'FamilyParams':
        Q = check_rotation(Q, 'Q', tol=1e-9)
        if not 0.0 < rho0 < math.pi / 4:
            raise InvalidInputError(f"rho0 = {rho0} outside (0, pi/4)")
        numbers = index_numbers(Q, rho0)
        n_q = numbers['n_Q']
        if n_q is None or n_q < 1:
            raise InvalidInputError(f"Family needs n_Q >= 1, got {n_q}")
        varsigma = min(numbers['D1'], numbers['D2']) if n_q % 2 == 0 else min(numbers['L1'], numbers['L2'])
        delta0 = (varsigma - (2 * n_q + 2) * rho0) / (2 * n_q + 3)
        if delta0 <= 0.0:
            raise InvalidInputError(f"No room for the control circles (delta0 = {delta0:.3e})")
        params = cls(Q, rho0, rho_tilde if rho_tilde is not None else rho0 + 0.5 * delta0, n_q, varsigma, delta0)
        params.validate()
        return params

    def validate(self):
        if not self.rho0 < self.rho_tilde:
            raise InvalidInputError(f"rho_tilde = {self.rho_tilde} must exceed rho0 = {self.rho0}")
        if not (2 * self.n_q + 2) * self.rho_tilde < self.varsigma:
            raise InvalidInputError(
                f"(2 n_Q + 2) rho_tilde = {(2 * self.n_q + 2) * self.rho_tilde:.6f} must stay below {self.varsigma:.6f}")


@dataclass
class Reduction:
    """Axis-aligned subproblem: the middle geodesic of the shortest CSC curve of radius rho_tilde"""
    frame: np.ndarray
    span: float
    head: List[OrientedArc]
    tail: List[OrientedArc]


def reduce_configuration(params: FamilyParams) -> Reduction:
    solution = shortest_csc(IDENTITY, params.Q, params.rho_tilde)
    if solution is None:
        raise InfeasibleError(f"No CSC curve of radius {params.rho_tilde} reaches Q")
    arcs = solution.curve.arcs
    middle = [k for k, arc in enumerate(arcs) if arc.is_geodesic]
    if not middle:
        raise InfeasibleError("The shortest CSC curve has no geodesic piece to host the control circles")
    k = middle[0]
    return Reduction(arcs[k].start_frame, arcs[k].length, arcs[:k], arcs[k + 1:])


class ControlTrajectories:
    """Pairs of tangent control circles l_i, r_i (i = 1..n_Q) along the geodesic I -> Rz(span)"""

    def __init__(self, rho_tilde: float, n_q: int, span: float):
        self.rho_tilde = rho_tilde
        self.n_q = n_q
        self.span = span
        s, c = math.sin(rho_tilde), math.cos(rho_tilde)
        self.p1 = np.array([c, 0.0, s])
        self.p2 = np.array([c, 0.0, -s])
        self.offsets = [0.0] + [self._offset(i) for i in range(2, n_q + 1)]
        if self.offsets[-1] >= span:
            raise InfeasibleError(f"Control circles overrun the geodesic ({self.offsets[-1]:.6f} >= {span:.6f})")

    def _offset(self, i: int) -> float:
        s2, c2 = math.sin(self.rho_tilde) ** 2, math.cos(self.rho_tilde) ** 2
        ring = math.cos(2 * i * self.rho_tilde)
        value = (ring - s2) / c2 if i % 2 == 0 else (ring + s2) / c2
        if not -1.0 <= value <= 1.0:
            raise InfeasibleError(f"Ring of radius {2 * i * self.rho_tilde:.6f} misses the circle line")
        return math.acos(value)

    def offset(self, i: int) -> float:
        return self.offsets[i - 1]

    def hubs(self, i: int) -> Tuple[np.ndarray, np.ndarray]:
        """Centers of the rings carrying (l_i, r_i)"""
        return (self.p1, self.p2) if i % 2 == 0 else (self.p2, self.p1)

    def left(self, i: int, x: float) -> np.ndarray:
        if i == 1:
            return self.p1 if x >= 0.0 else rotation_about_axis(self.p2, x) @ self.p1
        hub, _ = self.hubs(i)
        return rotation_about_axis(hub, x) @ rotation_about_axis(E3, self.offset(i)) @ self.p1

    def right(self, i: int, x: float) -> np.ndarray:
        if i == 1:
            return rotation_about_axis(self.p1, x) @ self.p2 if x >= 0.0 else self.p2
        _, hub = self.hubs(i)
        left = self.left(i, x)
        for point in circle_intersections(hub, 2 * i * self.rho_tilde, left, 2 * self.rho_tilde, tol=1e-10):
            if np.linalg.det(np.column_stack([hub, left, point])) <= 1e-12:
                return point
        raise InfeasibleError(f"Control circle r_{i} undefined at x = {x}")

    def frame(self, i: int, x: float) -> np.ndarray:
        """Frame at the touching point of the circles about l_i(x) and r_i(x)"""
        left, right = self.left(i, x), self.right(i, x)
        position = normalize(left + right)
        normal = normalize(left - math.cos(self.rho_tilde) * position)
        tangent = np.cross(normal, position)
        return np.column_stack([position, tangent, normal])

    @property
    def target(self) -> np.ndarray:
        return rotation_about_axis(E3, self.span)


def control_trajectories(params: FamilyParams) -> ControlTrajectories:
    params.validate()
    reduction = reduce_configuration(params)
    return ControlTrajectories(params.rho_tilde, params.n_q, reduction.span)


def _sweep(center, orientation: str, a, b) -> float:
    turn = angle_about(center, a, b) if orientation == 'ccw' else angle_about(center, b, a)
    return 0.0 if turn > TWO_PI - SWEEP_SNAP else turn


def _arc(center, radius: float, orientation: str, start, end) -> OrientedArc:
    return OrientedArc(center, radius, orientation, longitude(center, start), _sweep(center, orientation, start, end))


def _ring_point(hub: np.ndarray, center: np.ndarray, distance: float) -> np.ndarray:
    """Point at `distance` from hub on the great circle through hub and center"""
    direction = normalize(center - float(np.dot(center, hub)) * hub)
    return math.cos(distance) * hub + math.sin(distance) * direction


def thresholds(traj: ControlTrajectories, i: int, x_i: float) -> Tuple[float, float]:
    """Largest x <= x_i where l_{i+1}(x) faces r_i(x_i), smallest x >= x_i where r_{i+1}(x) faces l_i(x_i)"""
    if not 1 <= i < traj.n_q:
        raise InvalidInputError(f"Thresholds exist for 1 <= i < n_Q, got i = {i}")
    _, hub_r = traj.hubs(i)
    aligned = longitude(hub_r, traj.right(i, x_i)) - longitude(hub_r, traj.left(i + 1, 0.0))
    lower = x_i - (x_i - aligned) % TWO_PI

    hub_l, _ = traj.hubs(i)
    target = longitude(hub_l, traj.left(i, x_i))

    def gap(t):
        return wrap_angle(longitude(hub_l, traj.right(i + 1, t)) - target)

    grid = np.linspace(x_i, x_i + TWO_PI, THRESHOLD_GRID + 1)
    values = [gap(t) for t in grid]
    upper = None
    for a, b, ga, gb in zip(grid, grid[1:], values, values[1:]):
        if ga == 0.0:
            upper = float(a)
            break
        if ga < 0.0 < gb and gb - ga < math.pi:
            upper = brentq(gap, a, b, xtol=1e-13)
            break
    if upper is None:
        raise InfeasibleError(f"No alignment of r_{i + 1} with l_{i}({x_i}) within one turn")
    return lower, upper


def _ring_travel(traj: ControlTrajectories, i: int, start: float, stop: float) -> float:
    """Unwrapped longitude travel of r_{i+1} about its hub as x runs from start to stop"""
    hub, _ = traj.hubs(i)
    steps = max(2, int(math.ceil((stop - start) / 0.05)) + 1)
    phis = np.unwrap([longitude(hub, traj.right(i + 1, t)) for t in np.linspace(start, stop, steps)])
    travel = float(phis[-1] - phis[0])
    if travel < 0.0:
        logger.warning(f"Ring travel of r_{i + 1} is negative ({travel:.3e}); wrapping")
        travel %= TWO_PI
    return travel


def alpha_segment(traj: ControlTrajectories, i: int, x_i: Optional[float],
                  x_next: Optional[float]) -> PiecewiseArcCurve:
    """Segment from Q_i(x_i) to Q_{i+1}(x_next); i = 0 starts at I, i = n_Q ends at the target"""
    rho = traj.rho_tilde
    if i == 0:
        if x_next >= 0.0:
            arc = OrientedArc.from_frame(IDENTITY, rho, 'ccw', x_next)
        else:
            arc = OrientedArc.from_frame(IDENTITY, rho, 'cw', -x_next)
        return PiecewiseArcCurve(IDENTITY, [arc] if arc.sweep > 0.0 else [])
    start = traj.frame(i, x_i)
    if i == traj.n_q:
        return _csc(start, traj.target, rho, i)
    end = traj.frame(i + 1, x_next)
    lower, upper = thresholds(traj, i, x_i)
    hub_l, hub_r = traj.hubs(i)
    if x_next < lower:
        logger.debug(f"alpha_{i}: spiral about the right hub, {lower - x_next:.6f} rad of ring")
        right, left = traj.right(i, x_i), traj.left(i + 1, x_next)
        y1 = _ring_point(hub_r, right, (2 * i + 1) * rho)
        y2 = _ring_point(hub_r, left, (2 * i + 1) * rho)
        arcs = [
            _arc(right, rho, 'cw', start[:, 0], y1),
            OrientedArc(hub_r, (2 * i + 1) * rho, 'cw', longitude(hub_r, y1), lower - x_next),
            _arc(left, rho, 'ccw', y2, end[:, 0]),
        ]
    elif x_next > upper:
        logger.debug(f"alpha_{i}: spiral about the left hub beyond {upper:.6f}")
        left, right = traj.left(i, x_i), traj.right(i + 1, x_next)
        y1 = _ring_point(hub_l, left, (2 * i + 1) * rho)
        y2 = _ring_point(hub_l, right, (2 * i + 1) * rho)
        arcs = [
            _arc(left, rho, 'ccw', start[:, 0], y1),
            OrientedArc(hub_l, (2 * i + 1) * rho, 'ccw', longitude(hub_l, y1), _ring_travel(traj, i, upper, x_next)),
            _arc(right, rho, 'cw', y2, end[:, 0]),
        ]
    else:
        return _csc(start, end, rho, i)
    tol = settings.GEODUBINS_CONFIG['FRAME_TOL']
    curve = PiecewiseArcCurve(start, [arc for arc in arcs if arc.sweep > 0.0], tol=tol)
    deviation = frame_deviation(curve.end_frame, end)
    if deviation > tol:
        raise ContractError(f"alpha_{i} misses Q_{i + 1} by {deviation:.3e}", deviation=deviation)
    return curve


def _csc(start: np.ndarray, end: np.ndarray, rho: float, i: int) -> PiecewiseArcCurve:
    solution = shortest_csc(start, end, rho)
    if solution is None:
        raise InfeasibleError(f"No CSC curve for alpha_{i}")
    return solution.curve


def f_bar(params: FamilyParams, x: Sequence[float]) -> PiecewiseArcCurve:
    """Concatenation alpha_0 + ... + alpha_{n_Q} carried onto the configuration Q"""
    x = [float(v) for v in x]
    if len(x) != params.n_q:
        raise InvalidInputError(f"Expected {params.n_q} parameters, got {len(x)}")
    reduction = reduce_configuration(params)
    traj = ControlTrajectories(params.rho_tilde, params.n_q, reduction.span)
    padded = [None] + x + [None]
    local: List[OrientedArc] = []
    for i in range(params.n_q + 1):
        local.extend(alpha_segment(traj, i, padded[i], padded[i + 1]).arcs)
    tol = settings.GEODUBINS_CONFIG['FRAME_TOL']
    carried = PiecewiseArcCurve(IDENTITY, local, tol=tol).transformed(reduction.frame)
    return PiecewiseArcCurve(IDENTITY, reduction.head + carried.arcs + reduction.tail, tol=tol)


def family_grid(params: FamilyParams, points: Sequence[Sequence[float]]) -> List[PiecewiseArcCurve]:
    return parallel_map(lambda x: f_bar(params, x), points)
