"""
Curve classification: hemispheric axis, boundary bands, the extracted sequence, the index and the sphere map
"""
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from django.conf import settings
from scipy.optimize import minimize

from .arcs_curves import SampledCurve
from .config_index import EndpointCenters, endpoint_centers, index_numbers
from .exceptions import GeoDubinsError, InvalidInputError, ResolutionError
from .sphere_core import E2, IDENTITY, TWO_PI, check_rotation, fibonacci_sphere, longitude, normalize, reference_basis

logger = logging.getLogger(__name__)

MAX_QP_TANGENTS = 3000
ACTIVE_TANGENTS = 200
DEGENERACY_TOL = 1e-6
BAND_SLACK = 1e-5
FALLBACK_RADIUS = 1e-6

# band classes in slot order: x_{4k}, x_{4k+1}, x_{4k+2}, x_{4k+3}
TANGENT_PLUS, AREA_PLUS, TANGENT_MINUS, AREA_MINUS = range(4)
CLASS_NAMES = {TANGENT_PLUS: 'xi1+', AREA_PLUS: 'xi0+', TANGENT_MINUS: 'xi1-', AREA_MINUS: 'xi0-'}


@dataclass
class AxisResult:
    axis: np.ndarray
    value: float
    hemispheric: bool
    degenerate: bool = False

    def as_dict(self) -> Dict:
        return {'v_gamma': [float(c) for c in self.axis], 'm_gamma': self.value,
                'hemispheric': self.hemispheric, 'degenerate': self.degenerate}


def _region_rows(centers: EndpointCenters) -> np.ndarray:
    """Rows r with <r, v> >= 0 describing <v, p_i> <= 0 and <v, q_i> >= 0"""
    return np.array([-centers.p1, -centers.p2, centers.q1, centers.q2])


def _qp_tangents(tangents: np.ndarray, direction: np.ndarray) -> np.ndarray:
    if len(tangents) <= MAX_QP_TANGENTS:
        return tangents
    stride = np.linspace(0, len(tangents) - 1, MAX_QP_TANGENTS - ACTIVE_TANGENTS).astype(int)
    active = np.argsort(tangents @ direction)[:ACTIVE_TANGENTS]
    return tangents[np.unique(np.concatenate([stride, active, [0, len(tangents) - 1]]))]


def _grid_best(tangents: np.ndarray, region: np.ndarray, grid_points: int) -> np.ndarray:
    grid = fibonacci_sphere(grid_points)
    inside = np.all(grid @ region.T >= 0.0, axis=1)
    if not np.any(inside):
        logger.warning("Axis region holds no grid point; searching the whole sphere")
        inside[:] = True
    candidates = grid[inside]
    sample = tangents[np.linspace(0, len(tangents) - 1, min(len(tangents), 2000)).astype(int)]
    chunks = np.array_split(candidates, max(1, len(candidates) // 500))
    values = np.concatenate([np.min(sample @ chunk.T, axis=0) for chunk in chunks])
    return candidates[int(np.argmax(values))]


def _min_norm_axis(tangents: np.ndarray, region: np.ndarray, start: np.ndarray, value: float) -> Optional[np.ndarray]:
    """Minimize |w|^2 with <t_j, w> >= 1 on the region cone; v = w/|w| maximizes min <t_j, v>"""
    rows = np.vstack([tangents, region])
    bounds = np.concatenate([np.ones(len(tangents)), np.zeros(len(region))])
    constraint = {'type': 'ineq', 'fun': lambda w: rows @ w - bounds, 'jac': lambda w: rows}
    fit = minimize(lambda w: float(w @ w), start / max(value, 1e-3), jac=lambda w: 2.0 * w,
                   constraints=[constraint], method='SLSQP', options={'maxiter': 500, 'ftol': 1e-15})
    if not fit.success or np.min(rows @ fit.x - bounds) < -1e-9:
        logger.debug(f"Axis QP did not converge: {fit.message}")
        return None
    return normalize(fit.x)


def _maximin_axis(tangents: np.ndarray, region: np.ndarray, start: np.ndarray) -> np.ndarray:
    """Maximize mu subject to <t_j, v> >= mu, |v| = 1 and the region"""
    constraints = [
        {'type': 'ineq', 'fun': lambda z: tangents @ z[:3] - z[3],
         'jac': lambda z: np.hstack([tangents, -np.ones((len(tangents), 1))])},
        {'type': 'ineq', 'fun': lambda z: region @ z[:3],
         'jac': lambda z: np.hstack([region, np.zeros((len(region), 1))])},
        {'type': 'eq', 'fun': lambda z: np.array([z[:3] @ z[:3] - 1.0]),
         'jac': lambda z: np.concatenate([2.0 * z[:3], [0.0]])[None, :]},
    ]
    start_z = np.concatenate([start, [float(np.min(tangents @ start))]])
    fit = minimize(lambda z: -z[3], start_z, jac=lambda z: np.array([0.0, 0.0, 0.0, -1.0]),
                   constraints=constraints, method='SLSQP', options={'maxiter': 500, 'ftol': 1e-15})
    candidate = normalize(fit.x[:3])
    return candidate if np.min(tangents @ candidate) >= np.min(tangents @ start) else start


def _tie_break(tangents: np.ndarray, region: np.ndarray, start: np.ndarray, level: float) -> np.ndarray:
    """Among near-optimal axes take the one closest to the mean tangent"""
    mean = tangents.mean(axis=0)
    constraints = [
        {'type': 'ineq', 'fun': lambda v: tangents @ v - (level - DEGENERACY_TOL), 'jac': lambda v: tangents},
        {'type': 'ineq', 'fun': lambda v: region @ v, 'jac': lambda v: region},
        {'type': 'ineq', 'fun': lambda v: np.array([1.0 - v @ v]), 'jac': lambda v: -2.0 * v[None, :]},
    ]
    fit = minimize(lambda v: -float(mean @ v), start, jac=lambda v: -mean,
                   constraints=constraints, method='SLSQP', options={'maxiter': 500, 'ftol': 1e-15})
    if np.linalg.norm(fit.x) < 1e-9:
        return start
    return normalize(fit.x)


def hemispheric_axis(curve: SampledCurve, centers: EndpointCenters, grid_points: Optional[int] = None,
                     tol: float = 1e-9) -> AxisResult:
    """Axis v maximizing min_s <t(s), v> over the quadrilateral region"""
    grid_points = grid_points or settings.GEODUBINS_CONFIG['AXIS_GRID_POINTS']
    tangents = curve.tangents
    region = _region_rows(centers)
    start = _grid_best(tangents, region, grid_points)
    subset = _qp_tangents(tangents, start)
    axis = None
    if float(np.min(subset @ start)) > DEGENERACY_TOL:
        axis = _min_norm_axis(subset, region, start, float(np.min(subset @ start)))
    if axis is None:
        axis = _maximin_axis(subset, region, start)
    value = float(np.min(tangents @ axis))
    degenerate = abs(value) <= DEGENERACY_TOL
    if degenerate:
        axis = _tie_break(subset, region, axis, float(np.min(subset @ axis)))
        value = float(np.min(tangents @ axis))
        logger.warning(f"Hemispheric axis is not unique (m = {value:.3e}); using the tie-break axis")
    ahead = bool(np.all(curve.points[1:] @ E2 > -1e-12))
    return AxisResult(axis, value, value >= -tol and ahead, degenerate)


@dataclass
class Lune:
    """Longitudes [low, high] about axis, measured from the meridian of `reference`"""
    axis: np.ndarray
    reference: np.ndarray
    low: float
    high: float
    basis: Tuple[np.ndarray, np.ndarray] = field(repr=False, default=None)

    def __post_init__(self):
        self.basis = reference_basis(self.axis)
        self._origin = longitude(self.axis, self.reference, self.basis)

    def relative_longitudes(self, points: np.ndarray) -> np.ndarray:
        u1, u2 = self.basis
        phi = np.arctan2(points @ u2, points @ u1) - self._origin
        return (phi + math.pi) % TWO_PI - math.pi

    def meridian_normal(self, phi: float) -> np.ndarray:
        """Unit normal of the meridian plane at relative longitude phi, pointing to growing longitude"""
        u1, u2 = self.basis
        angle = self._origin + phi
        return -math.sin(angle) * u1 + math.cos(angle) * u2

    def distances(self, points: np.ndarray) -> np.ndarray:
        phi = self.relative_longitudes(points)
        colatitude = np.arccos(np.clip(points @ self.axis, -1.0, 1.0))
        inside = (phi >= self.low) & (phi <= self.high)
        gap = np.minimum((self.low - phi) % TWO_PI, (phi - self.high) % TWO_PI)
        near = np.arcsin(np.clip(np.sin(colatitude) * np.sin(np.minimum(gap, 0.5 * math.pi)), 0.0, 1.0))
        polar = np.minimum(colatitude, math.pi - colatitude)
        return np.where(inside, 0.0, np.where(gap <= 0.5 * math.pi, near, polar))

    def nearest_edge(self, point: np.ndarray) -> float:
        phi = float(self.relative_longitudes(point[None, :])[0])
        below = (self.low - phi) % TWO_PI
        above = (phi - self.high) % TWO_PI
        return self.low if below < above else self.high


def boundary_lune(axis: np.ndarray, centers: EndpointCenters, reference: np.ndarray,
                  extra: Optional[np.ndarray] = None) -> Lune:
    """Smallest lune about axis holding the four centers and the extra points"""
    probe = Lune(axis, reference, 0.0, 0.0)
    points = np.array(centers.as_list())
    if extra is not None and len(extra):
        points = np.vstack([points, extra])
    phi = probe.relative_longitudes(points)
    return Lune(axis, reference, float(phi.min()), float(phi.max()))


@dataclass
class ExtractionResult:
    x: List[float]
    epsilon: float
    axis: AxisResult
    lune: Lune
    runs: List[Dict] = field(default_factory=list)

    def as_dict(self) -> Dict:
        return {'x': self.x, 'epsilon': self.epsilon, 'index': epsilon_index(self.x),
                **self.axis.as_dict(), 'lune': [self.lune.low, self.lune.high], 'runs': self.runs}


def _runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    """Maximal index intervals [a, b] where mask holds"""
    padded = np.concatenate([[False], mask, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(int)))
    return [(int(a), int(b) - 1) for a, b in zip(edges[::2], edges[1::2])]


def _fan_area(loop: np.ndarray) -> float:
    """Signed area of a spherical polygon by a triangle fan about its first vertex"""
    a = loop[0]
    b, c = loop[1:-1], loop[2:]
    numerator = np.einsum('j,ij->i', a, np.cross(b, c))
    denominator = 1.0 + b @ a + c @ a + np.einsum('ij,ij->i', b, c)
    return float(np.sum(2.0 * np.arctan2(numerator, denominator)))


def _at_distance(points: np.ndarray, lune: Lune, edge: float, distances: np.ndarray) -> np.ndarray:
    """Points at the given distances outside the lune meridian `edge`, on the perpendiculars through `points`"""
    normal = lune.meridian_normal(edge)
    outward = normal if edge == lune.high else -normal
    feet = points - np.outer(points @ normal, normal)
    feet = feet / np.maximum(np.linalg.norm(feet, axis=1), 1e-300)[:, None]
    return np.cos(distances)[:, None] * feet + np.sin(distances)[:, None] * outward


def _check_resolution(curve: SampledCurve, epsilon: float):
    limit = epsilon / 4.0
    steps = np.concatenate([curve.point_steps(), curve.tangent_steps()])
    if steps.size and float(steps.max()) > limit:
        raise ResolutionError(f"Sample step {steps.max():.3e} exceeds {limit:.3e}; sample more densely",
                              float(steps.max()), limit)


def _reference_curve(Q: np.ndarray, rho0: float):
    from .dubins import shortest_csc

    solution = shortest_csc(IDENTITY, Q, rho0)
    return None if solution is None else solution.curve.sample(200)


def extract_sequence(curve: SampledCurve, Q, rho0: float, epsilon: float) -> ExtractionResult:
    """Band visits of the tangent (lengths) and of the position (areas), ordered into x_0, x_1, ..."""
    if not 0.0 < epsilon < rho0 / 8.0:
        raise InvalidInputError(f"epsilon = {epsilon} must lie in (0, rho0/8)")
    Q = check_rotation(Q, 'Q', tol=1e-9)
    centers = endpoint_centers(Q, rho0)
    _check_resolution(curve, epsilon)
    axis = hemispheric_axis(curve, centers)
    v = axis.axis
    reference = _reference_curve(Q, rho0)
    middle = reference.points[len(reference) // 2] if reference is not None else normalize(sum(centers.as_list()))
    lune = boundary_lune(v, centers, middle, None if reference is None else reference.points)
    n_plus = np.cross(middle, v)
    n_plus = n_plus / np.linalg.norm(n_plus)

    tangent_dot = curve.tangents @ v
    in_xi1 = (tangent_dot >= -BAND_SLACK) & (tangent_dot <= math.sin(epsilon))
    distances = lune.distances(curve.points)
    in_xi0 = (distances >= rho0 - epsilon) & (distances <= rho0)
    tangent_side = curve.tangents @ n_plus >= 0.0
    point_side = curve.points @ n_plus >= 0.0
    tangent_steps = curve.tangent_steps()

    events = []
    for mask, kind in ((in_xi1 & tangent_side, TANGENT_PLUS), (in_xi1 & ~tangent_side, TANGENT_MINUS),
                       (in_xi0 & point_side, AREA_PLUS), (in_xi0 & ~point_side, AREA_MINUS)):
        for a, b in _runs(mask):
            if b <= a:
                continue
            if kind in (TANGENT_PLUS, TANGENT_MINUS):
                value = float(np.sum(tangent_steps[a:b]))
            else:
                value = _run_area(curve.points[a:b + 1], distances[a:b + 1], lune, rho0, epsilon)
            if value > 0.0:
                events.append((a, b, kind, value))
    events.sort()

    x: List[float] = []
    runs = []
    slot = -1
    for a, b, kind, value in events:
        if slot < 0 or slot % 4 != kind:
            slot = slot + 1 + (kind - slot - 1) % 4
        while len(x) <= slot:
            x.append(0.0)
        x[slot] += value
        runs.append({'start': float(curve.params[a]), 'end': float(curve.params[b]),
                     'band': CLASS_NAMES[kind], 'slot': slot, 'value': value})
    logger.debug(f"Extracted {len(runs)} band visits, x = {x}")
    return ExtractionResult(x, epsilon, axis, lune, runs)


def _run_area(points: np.ndarray, distances: np.ndarray, lune: Lune, rho0: float, epsilon: float) -> float:
    """Area between a band visit and the inner boundary of the band"""
    inner = rho0 - epsilon
    edge = lune.nearest_edge(points[len(points) // 2])
    clamped = np.clip(distances, inner, rho0)
    outer = _at_distance(points, lune, edge, clamped)
    base = _at_distance(points, lune, edge, np.full(len(points), inner))
    return abs(_fan_area(np.vstack([outer, base[::-1]])))


def epsilon_index(x: Sequence[float]) -> int:
    nonzero = [k for k, value in enumerate(x) if value != 0.0]
    if not nonzero:
        return 0
    top = math.ceil(max(nonzero) / 2)
    if x[0] != 0.0 or (len(x) > 1 and x[1] != 0.0):
        return top
    return top - 1


def _zeros_fit(x: Sequence[float], base: int, count: int, room: int) -> bool:
    """Zero entries for the positions after index `base`, each shiftable by 4 d with d nondecreasing in [0, room]"""
    d = 0
    for t in range(1, count + 1):
        while d <= room and x[base + t + 4 * d] != 0.0:
            d += 1
        if d > room:
            return False
    return True


def _chain_length(first: int, total: int) -> int:
    # last nonzero position is first % 4 + total; chains opening at positions 2, 3 lose one
    return math.ceil(((first % 4) % 2 + total) / 2)


def _chain_sign(first: int) -> int:
    return 1 if first % 4 in (0, 1) else -1


@dataclass
class GCoordinates:
    y: List[float]
    n_q: int

    def as_dict(self) -> Dict:
        return {'y': self.y, 'n_Q': self.n_q}


def g_coordinates(x: Sequence[float], n_q: int) -> GCoordinates:
    """y_j = sum over good subsequences of length j of sign * product, by dynamic programming over chain ends"""
    support = [k for k, value in enumerate(x) if value != 0.0]
    # states[b][(first, steps)] = sum of products over chains ending at b
    states: Dict[int, Dict[Tuple[int, int], float]] = {}
    for b in support:
        table: Dict[Tuple[int, int], float] = defaultdict(float)
        # positions before the first pick are zeros drawn from x[0:b]
        if _zeros_fit(x, -1, b % 4, b // 4):
            table[(b, 0)] += x[b]
        for a in support:
            if a >= b or (b - a) % 4 == 0:
                continue
            step = (b - a) % 4
            if not _zeros_fit(x, a, step - 1, (b - a - step) // 4):
                continue
            for (first, steps), total in states[a].items():
                table[(first, steps + step)] += total * x[b]
        states[b] = dict(table)
    y = [0.0] * n_q
    for table in states.values():
        for (first, steps), total in table.items():
            j = _chain_length(first, steps)
            if 1 <= j <= n_q:
                y[j - 1] += _chain_sign(first) * total
    return GCoordinates(y, n_q)


def good_subsequences(x: Sequence[float]) -> Set[Tuple[Tuple[int, int], ...]]:
    """Nonzero (position, index) pairs of every good subsequence z_i = x_{k(i)}, found by walking k"""
    size = len(x)
    found: Set[Tuple[Tuple[int, int], ...]] = set()

    def walk(position: int, offset: int, zeros: int, picked: Tuple[Tuple[int, int], ...]):
        # stopping here leaves only zeros from beyond the support
        found.add(picked)
        # k(i) = i + 4 c(i) with c nondecreasing keeps k increasing and k(i) = i mod 4
        for c in range(offset, (size - position + 3) // 4):
            index = position + 4 * c
            if x[index] != 0.0:
                walk(position + 1, c, 0, picked + ((position, index),))
            elif zeros < 2 or position - 2 < 1:
                walk(position + 1, c, zeros + 1, picked)

    walk(0, 0, 0, ())
    return found


def g_coordinates_exhaustive(x: Sequence[float], n_q: int) -> GCoordinates:
    """Enumerate every good subsequence and apply the length and sign rules directly"""
    y = [0.0] * n_q
    for picked in good_subsequences(x):
        if not picked:
            continue
        positions = [position for position, _ in picked]
        sign = 1 if positions[0] <= 1 else -1
        length = math.ceil(positions[-1] / 2) - (0 if sign > 0 else 1)
        if 1 <= length <= n_q:
            y[length - 1] += sign * math.prod(x[index] for _, index in picked)
    return GCoordinates(y, n_q)


def sphere_projection(a: Sequence[float]) -> np.ndarray:
    """Map the closed unit ball of R^n onto S^n"""
    a = np.asarray(a, dtype=float)
    n = len(a)
    last = math.sqrt(float(np.sum(np.cos(math.pi * a) ** 2)))
    return np.concatenate([np.sin(math.pi * a), [last]]) / math.sqrt(n)


def scaled_coordinates(y: Sequence[float], radius: float) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    norm = float(np.linalg.norm(y))
    return y / radius if norm <= radius else y / norm


def in_c0(curve: SampledCurve, extraction: ExtractionResult, rho0: float) -> bool:
    """Hemispheric and inside the closed rho0-neighbourhood of the lune"""
    if not extraction.axis.hemispheric:
        return False
    return bool(np.all(extraction.lune.distances(curve.points) <= rho0 + 1e-12))


def _n_q(Q, rho0: float) -> int:
    n_q = index_numbers(Q, rho0)['n_Q']
    if n_q is None or n_q < 1:
        raise InvalidInputError(f"The sphere map needs n_Q >= 1, got {n_q}")
    return n_q


def basepoint(n_q: int) -> np.ndarray:
    point = np.zeros(n_q + 1)
    point[-1] = -1.0
    return point


def dense_sample_count(curve, epsilon: float, minimum: int = 2) -> int:
    """Enough samples for tangent steps of epsilon/8"""
    radii = [arc.radius for arc in curve.arcs if arc.length > 0.0]
    if not radii:
        return minimum
    smallest = min(math.sin(r) for r in radii)
    return max(minimum, math.ceil(8.0 * curve.length / (epsilon * smallest)) + 1)


def on_boundary(extraction: ExtractionResult) -> bool:
    """The curve meets a position band, or its tangent meets both tangent bands"""
    nonzero = {k % 4 for k, value in enumerate(extraction.x) if value != 0.0}
    return bool(nonzero & {AREA_PLUS, AREA_MINUS}) or {TANGENT_PLUS, TANGENT_MINUS} <= nonzero


def estimate_radius(curves: Iterable[SampledCurve], Q, rho0: float, epsilon: float) -> Optional[float]:
    """Half the smallest |G_eps| over the corpus curves lying on the boundary of C0; None without any"""
    n_q = _n_q(Q, rho0)
    norms = []
    for curve in curves:
        extraction = extract_sequence(curve, Q, rho0, epsilon)
        if not (in_c0(curve, extraction, rho0) and on_boundary(extraction)):
            continue
        norm = float(np.linalg.norm(g_coordinates(extraction.x, n_q).y))
        if norm == 0.0:
            logger.warning(f"Boundary curve with G = 0 skipped (x = {extraction.x})")
            continue
        norms.append(norm)
    if not norms:
        return None
    logger.debug(f"{len(norms)} boundary curves, smallest |G| = {min(norms):.3e}")
    return 0.5 * min(norms)


@lru_cache(maxsize=32)
def _family_radius(q_key: bytes, rho0: float, epsilon: float) -> float:
    from .family_generator import FamilyParams, family_grid

    Q = np.frombuffer(q_key).reshape(3, 3).copy()
    radius = None
    try:
        params = FamilyParams.from_configuration(Q, rho0)
        draws = np.random.default_rng(0).uniform(
            -math.pi, math.pi, size=(settings.GEODUBINS_CONFIG['G_RADIUS_SAMPLES'], params.n_q))
        curves = family_grid(params, [list(row) for row in draws])
        radius = estimate_radius([c.sample(dense_sample_count(c, epsilon)) for c in curves], Q, rho0, epsilon)
    except GeoDubinsError as e:
        logger.warning(f"No family corpus for the G radius: {str(e)}")
    if radius is None:
        logger.warning(f"No boundary curve found; G radius falls back to {FALLBACK_RADIUS}")
        return FALLBACK_RADIUS
    return radius


def default_radius(Q, rho0: float, epsilon: float) -> float:
    """G_RADIUS when configured, otherwise estimated from seeded family curves"""
    configured = settings.GEODUBINS_CONFIG['G_RADIUS']
    if configured is not None:
        return configured
    return _family_radius(check_rotation(Q, 'Q', tol=1e-9).tobytes(), rho0, epsilon)


def g_map(curve: SampledCurve, Q, rho0: float, epsilon: float, radius: Optional[float] = None) -> np.ndarray:
    """Point of S^{n_Q} attached to a sampled curve"""
    return classify(curve, Q, rho0, epsilon, radius).point


@dataclass
class Classification:
    extraction: ExtractionResult
    index: int
    coordinates: GCoordinates
    inside: bool
    point: np.ndarray

    def as_dict(self) -> Dict:
        return {**self.extraction.as_dict(), 'index': self.index, 'y': self.coordinates.y,
                'n_Q': self.coordinates.n_q, 'in_c0': self.inside, 'point': [float(c) for c in self.point]}


def classify(curve: SampledCurve, Q, rho0: float, epsilon: float, radius: Optional[float] = None) -> Classification:
    n_q = _n_q(Q, rho0)
    extraction = extract_sequence(curve, Q, rho0, epsilon)
    coordinates = g_coordinates(extraction.x, n_q)
    inside = in_c0(curve, extraction, rho0)
    point = basepoint(n_q)
    if inside:
        # y = 0 lands on the pole at every scale
        if radius is None:
            radius = default_radius(Q, rho0, epsilon) if any(coordinates.y) else 1.0
        point = sphere_projection(scaled_coordinates(coordinates.y, radius))
    return Classification(extraction, epsilon_index(extraction.x), coordinates, inside, point)
