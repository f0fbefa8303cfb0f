"""
Piecewise-arc curves, sampled curves, Frenet frames and tangent-circle curvature
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings

from .exceptions import ContractError, InfeasibleError, InvalidInputError, ResolutionError
from .sphere_core import (
    TWO_PI, check_rotation, check_unit, frame_deviation, frame_from_columns, left_center,
    longitude, reference_basis, right_center,
)
from .workers import parallel_map

logger = logging.getLogger(__name__)

ORIENTATIONS = ('ccw', 'cw')
HALF_PI = 0.5 * math.pi
CROSSING_TOL = 1e-6


def _cot(radius: float) -> float:
    if radius == HALF_PI:
        return 0.0
    return math.cos(radius) / math.sin(radius)


@dataclass(frozen=True, eq=False)
class OrientedArc:
    """Arc of the circle of spherical radius `radius` about `center`"""
    center: np.ndarray
    radius: float
    orientation: str
    start_angle: float
    sweep: float

    def __post_init__(self):
        object.__setattr__(self, 'center', check_unit(self.center, 'arc center', tol=1e-9))
        if not 0.0 < self.radius < math.pi:
            raise InvalidInputError(f"Arc radius {self.radius} outside (0, pi)")
        if self.orientation not in ORIENTATIONS:
            raise InvalidInputError(f"Unknown orientation {self.orientation!r}")
        if not (math.isfinite(self.sweep) and self.sweep >= 0.0):
            raise InvalidInputError(f"Arc sweep must be finite and non-negative, got {self.sweep}")
        if not math.isfinite(self.start_angle):
            raise InvalidInputError("Arc start angle must be finite")

    @classmethod
    def from_frame(cls, frame, radius: float, orientation: str, sweep: float) -> 'OrientedArc':
        """Arc leaving `frame` tangentially, turning left (ccw) or right (cw)"""
        center = left_center(frame, radius) if orientation == 'ccw' else right_center(frame, radius)
        center = center / np.linalg.norm(center)
        return cls(center, radius, orientation, longitude(center, frame[:, 0]), sweep)

    @property
    def sign(self) -> int:
        return 1 if self.orientation == 'ccw' else -1

    @property
    def length(self) -> float:
        return self.sweep * math.sin(self.radius)

    @property
    def curvature(self) -> float:
        return self.sign * _cot(self.radius)

    @property
    def is_geodesic(self) -> bool:
        return abs(self.radius - HALF_PI) < 1e-12

    @property
    def end_angle(self) -> float:
        return self.start_angle + self.sign * self.sweep

    def points(self, offsets) -> Tuple[np.ndarray, np.ndarray]:
        """Positions and unit tangents at angular offsets along the arc"""
        u1, u2 = reference_basis(self.center)
        phi = self.start_angle + self.sign * np.asarray(offsets, dtype=float).reshape(-1)
        cos_phi = np.cos(phi)[:, None]
        sin_phi = np.sin(phi)[:, None]
        radial = cos_phi * u1 + sin_phi * u2
        positions = math.cos(self.radius) * self.center + math.sin(self.radius) * radial
        tangents = self.sign * (-sin_phi * u1 + cos_phi * u2)
        return positions, tangents

    def frame_at(self, offset: float) -> np.ndarray:
        positions, tangents = self.points([offset])
        return frame_from_columns(positions[0], tangents[0])

    @property
    def start_frame(self) -> np.ndarray:
        return self.frame_at(0.0)

    @property
    def end_frame(self) -> np.ndarray:
        return self.frame_at(self.sweep)

    def truncated(self, offset0: float, offset1: float) -> 'OrientedArc':
        """Sub-arc between two angular offsets"""
        offset0 = min(max(offset0, 0.0), self.sweep)
        offset1 = min(max(offset1, offset0), self.sweep)
        return OrientedArc(self.center, self.radius, self.orientation,
                           self.start_angle + self.sign * offset0, offset1 - offset0)

    def rotated(self, rotation) -> 'OrientedArc':
        center = rotation @ self.center
        start = rotation @ self.points([0.0])[0][0]
        return OrientedArc(center, self.radius, self.orientation, longitude(center, start), self.sweep)


def circle_point(arc: OrientedArc, s: float) -> Tuple[np.ndarray, np.ndarray]:
    """Position and tangent at angular offset s from the arc start"""
    if not -1e-12 <= s <= arc.sweep + 1e-12:
        raise InvalidInputError(f"Offset {s} outside [0, {arc.sweep}]")
    positions, tangents = arc.points([min(max(s, 0.0), arc.sweep)])
    return positions[0], tangents[0]


@dataclass
class SampledCurve:
    params: np.ndarray
    points: np.ndarray
    tangents: np.ndarray

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float).reshape(-1)
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        self.tangents = np.asarray(self.tangents, dtype=float).reshape(-1, 3)
        n = len(self.params)
        if n < 2 or self.points.shape[0] != n or self.tangents.shape[0] != n:
            raise InvalidInputError("Sampled curve needs at least two aligned samples")
        if np.any(np.diff(self.params) < 0.0):
            raise InvalidInputError("Sample parameters must be non-decreasing")
        if np.max(np.abs(np.einsum('ij,ij->i', self.points, self.tangents))) > 1e-9:
            raise InvalidInputError("Tangents must be orthogonal to positions")

    def __len__(self) -> int:
        return len(self.params)

    def point_steps(self) -> np.ndarray:
        return _angles_between(self.points[:-1], self.points[1:])

    def tangent_steps(self) -> np.ndarray:
        return _angles_between(self.tangents[:-1], self.tangents[1:])

    def index_at(self, t: float) -> int:
        return int(np.argmin(np.abs(self.params - t)))


def _angles_between(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    cross = np.linalg.norm(np.cross(a, b), axis=1)
    dot = np.einsum('ij,ij->i', a, b)
    return np.arctan2(cross, dot)


class PiecewiseArcCurve:
    """C^1 concatenation of oriented arcs starting from a Frenet frame"""

    def __init__(self, start_frame, arcs: Sequence[OrientedArc] = (), tol: Optional[float] = None):
        self.start_frame = check_rotation(start_frame, 'start frame', tol=1e-9)
        self.arcs: List[OrientedArc] = list(arcs)
        self.tol = tol if tol is not None else settings.GEODUBINS_CONFIG['JUNCTION_TOL']
        self._breaks = np.concatenate([[0.0], np.cumsum([arc.length for arc in self.arcs])])
        self._check_junctions()

    def _check_junctions(self):
        previous = self.start_frame
        for k, arc in enumerate(self.arcs):
            deviation = frame_deviation(previous[:, :2], arc.start_frame[:, :2])
            if deviation > self.tol:
                raise ContractError(f"Arc {k} does not continue the curve C^1 (deviation {deviation:.3e})",
                                    deviation=deviation)
            previous = arc.end_frame

    def __len__(self) -> int:
        return len(self.arcs)

    def __repr__(self) -> str:
        return f"PiecewiseArcCurve(arcs={len(self.arcs)}, length={self.length:.6f})"

    @property
    def length(self) -> float:
        return float(self._breaks[-1])

    @property
    def end_frame(self) -> np.ndarray:
        return self.arcs[-1].end_frame if self.arcs else self.start_frame.copy()

    def frame_at_length(self, s: float) -> np.ndarray:
        if not self.arcs:
            return self.start_frame.copy()
        s = min(max(s, 0.0), self.length)
        k = int(np.searchsorted(self._breaks, s, side='right')) - 1
        k = min(max(k, 0), len(self.arcs) - 1)
        arc = self.arcs[k]
        offset = (s - self._breaks[k]) / math.sin(arc.radius)
        return arc.frame_at(min(offset, arc.sweep))

    def signed_curvatures(self) -> List[float]:
        return [arc.curvature for arc in self.arcs]

    def max_abs_curvature(self) -> float:
        return max((abs(k) for k in self.signed_curvatures()), default=0.0)

    def sample(self, n: int) -> SampledCurve:
        """n samples uniform in arc length"""
        if n < 2:
            raise InvalidInputError("Need at least two samples")
        total = self.length
        lengths = np.linspace(0.0, total, n)
        points = np.empty((n, 3))
        tangents = np.empty((n, 3))
        if not self.arcs or total == 0.0:
            points[:] = self.start_frame[:, 0]
            tangents[:] = self.start_frame[:, 1]
            return SampledCurve(np.linspace(0.0, 1.0, n), points, tangents)
        owner = np.clip(np.searchsorted(self._breaks, lengths, side='right') - 1, 0, len(self.arcs) - 1)
        for k, arc in enumerate(self.arcs):
            mask = owner == k
            if not np.any(mask):
                continue
            offsets = np.clip((lengths[mask] - self._breaks[k]) / math.sin(arc.radius), 0.0, arc.sweep)
            points[mask], tangents[mask] = arc.points(offsets)
        return SampledCurve(lengths / total, points, tangents)

    def segment(self, s0: float, s1: float) -> 'PiecewiseArcCurve':
        """Sub-curve between two arc-length positions"""
        s0 = min(max(s0, 0.0), self.length)
        s1 = min(max(s1, s0), self.length)
        pieces = []
        for k, arc in enumerate(self.arcs):
            lo, hi = self._breaks[k], self._breaks[k + 1]
            if hi <= s0 or lo >= s1 or arc.sweep == 0.0:
                continue
            scale = math.sin(arc.radius)
            piece = arc.truncated((max(s0, lo) - lo) / scale, (min(s1, hi) - lo) / scale)
            if piece.sweep > 0.0:
                pieces.append(piece)
        return PiecewiseArcCurve(self.frame_at_length(s0), pieces, tol=self.tol)

    def transformed(self, rotation) -> 'PiecewiseArcCurve':
        """Image under a rotation of the sphere"""
        rotation = check_rotation(rotation)
        # rotation roundoff adds to junction gaps already near JUNCTION_TOL
        tol = max(self.tol, settings.GEODUBINS_CONFIG['FRAME_TOL'])
        return PiecewiseArcCurve(rotation @ self.start_frame, [arc.rotated(rotation) for arc in self.arcs], tol=tol)

    def simplified(self, tol: float = 1e-12) -> 'PiecewiseArcCurve':
        """Drop empty arcs and merge contiguous arcs of one circle"""
        merged: List[OrientedArc] = []
        for arc in self.arcs:
            if arc.sweep <= tol:
                continue
            if merged and _same_circle(merged[-1], arc, tol):
                last = merged.pop()
                arc = OrientedArc(last.center, last.radius, last.orientation, last.start_angle,
                                  last.sweep + arc.sweep)
            merged.append(arc)
        return PiecewiseArcCurve(self.start_frame, merged, tol=self.tol)


def _same_circle(a: OrientedArc, b: OrientedArc, tol: float) -> bool:
    if a.orientation != b.orientation or abs(a.radius - b.radius) > tol:
        return False
    if np.max(np.abs(a.center - b.center)) > 1e-10:
        return False
    gap = (b.start_angle - a.end_angle) % TWO_PI
    return min(gap, TWO_PI - gap) < 1e-9


def frenet_frame_at(curve: PiecewiseArcCurve, t: float) -> np.ndarray:
    """Frenet frame at normalized arc-length parameter t"""
    if not -1e-12 <= t <= 1.0 + 1e-12:
        raise InvalidInputError(f"Curve parameter {t} outside [0, 1]")
    if t <= 0.0:
        return curve.start_frame.copy()
    return curve.frame_at_length(t * curve.length)


def concatenate(a: PiecewiseArcCurve, b: PiecewiseArcCurve) -> PiecewiseArcCurve:
    deviation = frame_deviation(a.end_frame, b.start_frame)
    if deviation > a.tol:
        raise ContractError(f"Cannot concatenate: end frame differs from start frame by {deviation:.3e}",
                            deviation=deviation)
    return PiecewiseArcCurve(a.start_frame, a.arcs + b.arcs, tol=a.tol)


@dataclass(frozen=True)
class CurvatureBounds:
    kappa_minus: float
    kappa_plus: float
    saturated: bool = False


def probe_grid(rho0: Optional[float] = None, count: Optional[int] = None) -> np.ndarray:
    """Logarithmic probe radii in [rho0/4, pi/2] together with their mirrors pi - r"""
    rho0 = rho0 if rho0 is not None else settings.GEODUBINS_CONFIG['PROBE_RHO0']
    count = count or settings.GEODUBINS_CONFIG['PROBE_COUNT']
    radii = np.geomspace(rho0 / 4.0, HALF_PI, count)
    return np.unique(np.concatenate([radii, math.pi - radii]))


def _largest_fitting_radius(fits, radii: np.ndarray, iterations: int = 50) -> Tuple[float, bool]:
    """Largest radius r with fits(r); the set of fitting radii is an initial interval"""
    flags = [fits(r) for r in radii]
    if not flags[0]:
        return float(radii[0]), True
    if all(flags):
        return float(radii[-1]), True
    k = flags.index(False) - 1
    lo, hi = float(radii[k]), float(radii[k + 1])
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if fits(mid):
            lo = mid
        else:
            hi = mid
    return lo, False


def curvature_bounds(curve: SampledCurve, t: float, probe_radii=None,
                     window: Optional[int] = None, tol: float = 1e-12) -> CurvatureBounds:
    """Left/right curvature at curve(t) from the largest tangent circles clearing a local window"""
    radii = np.sort(np.asarray(probe_radii if probe_radii is not None else probe_grid(), dtype=float))
    window = window or settings.GEODUBINS_CONFIG['PROBE_WINDOW']
    i = curve.index_at(t)
    lo, hi = max(0, i - window), min(len(curve) - 1, i + window)
    steps = curve.point_steps()[lo:hi]
    limit = float(radii[0]) / 10.0
    if steps.size and float(steps.max()) > limit:
        raise ResolutionError(f"Sample step {steps.max():.3e} exceeds {limit:.3e}", float(steps.max()), limit)
    neighbours = np.delete(curve.points[lo:hi + 1], i - lo, axis=0)
    frame = frame_from_columns(curve.points[i], curve.tangents[i])

    def clears(center_fn):
        def fits(r):
            center = center_fn(frame, r)
            return bool(np.all(neighbours @ center <= math.cos(r) + tol))
        return fits

    r_left, sat_left = _largest_fitting_radius(clears(left_center), radii)
    r_right, sat_right = _largest_fitting_radius(clears(right_center), radii)
    kappa_plus = _cot(r_left)
    kappa_minus = -_cot(r_right)
    crossing = kappa_minus - kappa_plus
    if crossing > CROSSING_TOL * max(1.0, abs(kappa_minus), abs(kappa_plus)):
        raise ContractError(f"Curvature bounds cross at t = {t}: kappa- = {kappa_minus:.6e} > kappa+ = {kappa_plus:.6e}",
                            deviation=crossing)
    if crossing > 0.0:
        # bisection roundoff on a circle of the probe grid
        kappa_minus = kappa_plus = 0.5 * (kappa_minus + kappa_plus)
    return CurvatureBounds(kappa_minus, kappa_plus, sat_left or sat_right)


def curvature_scan(curve: SampledCurve, ts: Sequence[float], probe_radii=None) -> List[CurvatureBounds]:
    radii = probe_radii if probe_radii is not None else probe_grid()
    return parallel_map(lambda t: curvature_bounds(curve, t, radii), ts)


def geodesic_loops(frame, n: int) -> OrientedArc:
    """n full turns of the great circle tangent to frame"""
    return OrientedArc.from_frame(frame, HALF_PI, 'ccw', TWO_PI * n)


def add_loops(curve: PiecewiseArcCurve, t0: float, n: int) -> PiecewiseArcCurve:
    """Insert n great-circle turns at curve(t0)"""
    if int(n) != n or n < 1:
        raise InvalidInputError(f"Loop count must be a positive integer, got {n}")
    if not 0.0 <= t0 <= 1.0:
        raise InvalidInputError(f"Loop position {t0} outside [0, 1]")
    s0 = t0 * curve.length
    head = curve.segment(0.0, s0)
    tail = curve.segment(s0, curve.length)
    loop = geodesic_loops(head.end_frame, int(n))
    return PiecewiseArcCurve(curve.start_frame, head.arcs + [loop] + tail.arcs, tol=curve.tol)


def spread_loops(curve: PiecewiseArcCurve, n: int, rho_tilde: float) -> PiecewiseArcCurve:
    """Loops at t_j = j/n (one at each end, two inside) joined by shortest CSC curves of radius rho_tilde"""
    from .dubins import shortest_csc

    if int(n) != n or n < 1:
        raise InvalidInputError(f"Site count must be a positive integer, got {n}")
    n = int(n)
    frames = [curve.frame_at_length(j * curve.length / n) for j in range(n + 1)]
    frames[0] = curve.start_frame
    frames[-1] = curve.end_frame
    arcs: List[OrientedArc] = []
    for j, frame in enumerate(frames):
        arcs.append(geodesic_loops(frame, 1 if j in (0, n) else 2))
        if j == n:
            break
        solution = shortest_csc(frame, frames[j + 1], rho_tilde)
        if solution is None:
            raise InfeasibleError(f"No CSC curve of radius {rho_tilde} between loop sites {j} and {j + 1}")
        arcs.extend(solution.curve.arcs)
    return PiecewiseArcCurve(curve.start_frame, arcs, tol=curve.tol)
