"""
Endpoint configurations: tangent-circle centers, the index n_Q, hypotheses, critical curves
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings
from scipy.optimize import least_squares

from .arcs_curves import HALF_PI, OrientedArc, PiecewiseArcCurve
from .exceptions import ContractError, InvalidInputError
from .sphere_core import (
    E1, E2, IDENTITY, check_rotation, normalize, rotation_about_axis, sphere_distance,
)
from .workers import parallel_map

logger = logging.getLogger(__name__)

CEIL_SLACK = 1e-9


def _check_rho0(rho0: float):
    if not 0.0 < rho0 < math.pi / 4:
        raise InvalidInputError(f"rho0 = {rho0} outside (0, pi/4)")


@dataclass(eq=False)
class EndpointCenters:
    p1: np.ndarray
    p2: np.ndarray
    q1: np.ndarray
    q2: np.ndarray

    def as_list(self) -> List[np.ndarray]:
        return [self.p1, self.p2, self.q1, self.q2]


def endpoint_centers(Q, rho0: float) -> EndpointCenters:
    """Centers of the radius-rho0 circles tangent at I (p1 left, p2 right) and at Q (q1, q2)"""
    _check_rho0(rho0)
    Q = check_rotation(Q, 'Q', tol=1e-9)
    return _centers(Q, rho0)


def _centers(Q, rho: float) -> EndpointCenters:
    p1 = np.array([math.cos(rho), 0.0, math.sin(rho)])
    p2 = np.array([math.cos(rho), 0.0, -math.sin(rho)])
    return EndpointCenters(p1, p2, Q @ p1, Q @ p2)


def truncated_side(length: float, rho0: float) -> int:
    return 2 * math.ceil(length / (4.0 * rho0) - CEIL_SLACK) - 3


def truncated_diagonal(length: float, rho0: float) -> int:
    return 2 * math.ceil(length / (4.0 * rho0) - 0.5 - CEIL_SLACK) - 2


def index_numbers(Q, rho0: float) -> Dict:
    """Distances, truncated lengths and n_Q without the hypothesis checks"""
    centers = _centers(np.asarray(Q, dtype=float), rho0)
    return index_from_centers(centers, rho0)


def index_from_centers(centers: EndpointCenters, rho0: float) -> Dict:
    L1 = sphere_distance(centers.p1, centers.q1)
    L2 = sphere_distance(centers.p2, centers.q2)
    D1 = sphere_distance(centers.p1, centers.q2)
    D2 = sphere_distance(centers.p2, centers.q1)
    Lbar = (truncated_side(L1, rho0), truncated_side(L2, rho0))
    Dbar = (truncated_diagonal(D1, rho0), truncated_diagonal(D2, rho0))
    n_q, branch = None, None
    if min(Lbar) > max(Dbar):
        n_q, branch = Lbar[0], 'L'
    elif min(Dbar) > max(Lbar):
        n_q, branch = Dbar[0], 'D'
    if branch == 'L' and Lbar[0] != Lbar[1] or branch == 'D' and Dbar[0] != Dbar[1]:
        logger.warning(f"Truncated lengths disagree on the {branch} branch: L={Lbar}, D={Dbar}")
    return {'L1': L1, 'L2': L2, 'D1': D1, 'D2': D2,
            'Lbar1': Lbar[0], 'Lbar2': Lbar[1], 'Dbar1': Dbar[0], 'Dbar2': Dbar[1],
            'n_Q': n_q, 'branch': branch}


def is_convex_quadrilateral(a, b, c, d, tol: float = 1e-12) -> bool:
    """Strict spherical convexity of the polygon a-b-c-d"""
    vertices = [np.asarray(v, dtype=float) for v in (a, b, c, d)]
    centroid = sum(vertices)
    if np.linalg.norm(centroid) < tol or any(np.dot(v, centroid) <= tol for v in vertices):
        return False
    signs = []
    for k in range(4):
        edge = np.cross(vertices[k], vertices[(k + 1) % 4])
        for j in range(4):
            if j in (k, (k + 1) % 4):
                continue
            signs.append(float(np.dot(edge, vertices[j])))
    return all(s > tol for s in signs) or all(s < -tol for s in signs)


def _inside_polygon(y: np.ndarray, vertices: Sequence[np.ndarray]) -> bool:
    """Winding test after gnomonic projection about the vertex centroid"""
    center = normalize(sum(vertices))
    if np.dot(y, center) <= 0.0:
        return False
    u1 = normalize(np.cross(center, E1) if abs(center[0]) < 0.9 else np.cross(center, E2))
    u2 = np.cross(center, u1)

    def project(v):
        scaled = v / np.dot(v, center)
        return np.array([np.dot(scaled, u1), np.dot(scaled, u2)])

    origin = project(y)
    pts = [project(v) - origin for v in vertices]
    winding = 0.0
    for k in range(len(pts)):
        a, b = pts[k], pts[(k + 1) % len(pts)]
        winding += math.atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1])
    return abs(winding) > math.pi


def _distance_to_segment(y: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    normal = np.cross(a, b)
    if np.linalg.norm(normal) < 1e-15:
        return sphere_distance(y, a)
    normal = normal / np.linalg.norm(normal)
    foot = y - np.dot(y, normal) * normal
    if np.linalg.norm(foot) > 1e-15:
        foot = foot / np.linalg.norm(foot)
        if np.dot(np.cross(a, foot), normal) >= 0.0 and np.dot(np.cross(foot, b), normal) >= 0.0:
            return math.asin(min(1.0, abs(float(np.dot(y, normal)))))
    return min(sphere_distance(y, a), sphere_distance(y, b))


def distance_to_polygon(y, vertices: Sequence[np.ndarray]) -> float:
    y = np.asarray(y, dtype=float)
    if _inside_polygon(y, vertices):
        return 0.0
    return min(_distance_to_segment(y, vertices[k], vertices[(k + 1) % len(vertices)])
               for k in range(len(vertices)))


@dataclass
class HypothesisReport:
    h1: bool
    h2: bool
    h3: bool
    h4: bool
    diagnostics: Dict = field(default_factory=dict)


def _csc_neighbourhood_check(Q: np.ndarray, rho_tilde: float, samples: int) -> Dict:
    from .dubins import shortest_csc

    centers = _centers(Q, rho_tilde)
    quad = [centers.p1, centers.q1, centers.q2, centers.p2]
    ahead = bool(np.dot(centers.q1, E2) > 0.0 and np.dot(centers.q2, E2) > 0.0)
    solution = shortest_csc(IDENTITY, Q, rho_tilde)
    if solution is None:
        return {'rho_tilde': rho_tilde, 'ok': False, 'reason': 'no CSC curve'}
    points = solution.curve.sample(samples).points
    worst = max(distance_to_polygon(y, quad) for y in points)
    return {'rho_tilde': rho_tilde, 'ok': ahead and worst < rho_tilde,
            'max_distance': worst, 'q_ahead': ahead, 'length': solution.length}


def check_hypotheses(Q, rho0: float, delta_grid: Optional[Sequence[float]] = None,
                     samples: Optional[int] = None) -> HypothesisReport:
    """Hypotheses h1-h4 for the classifying map; h4 by sampling rho_tilde"""
    _check_rho0(rho0)
    Q = check_rotation(Q, 'Q', tol=1e-9)
    config = settings.GEODUBINS_CONFIG
    if delta_grid is None:
        delta_grid = [offset * rho0 for offset in config['H4_OFFSETS']]
    samples = samples or config['H4_SAMPLES']
    centers = _centers(Q, rho0)
    numbers = index_from_centers(centers, rho0)
    h1 = bool(np.dot(centers.q1, E2) > 0.0 and np.dot(centers.q2, E2) > 0.0)
    h2 = min(numbers['D1'], numbers['D2']) > 2.0 * rho0 + 1e-12
    h3 = is_convex_quadrilateral(centers.p1, centers.q1, centers.q2, centers.p2)
    checks = parallel_map(lambda delta: _csc_neighbourhood_check(Q, rho0 + delta, samples), delta_grid)
    h4 = bool(checks) and all(c['ok'] for c in checks)
    logger.debug(f"Hypotheses for rho0={rho0}: h1={h1} h2={h2} h3={h3} h4={h4}")
    return HypothesisReport(h1, h2, h3, h4, {'h4_samples': checks})


@dataclass
class IndexReport:
    L1: float
    L2: float
    D1: float
    D2: float
    Lbar1: int
    Lbar2: int
    Dbar1: int
    Dbar2: int
    n_Q: Optional[int]
    branch: Optional[str]
    h1: bool
    h2: bool
    h3: bool
    h4: bool

    def as_dict(self) -> Dict:
        return asdict(self)


def index_report(Q, rho0: float, delta_grid: Optional[Sequence[float]] = None) -> IndexReport:
    _check_rho0(rho0)
    Q = check_rotation(Q, 'Q', tol=1e-9)
    numbers = index_numbers(Q, rho0)
    flags = check_hypotheses(Q, rho0, delta_grid)
    return IndexReport(h1=flags.h1, h2=flags.h2, h3=flags.h3, h4=flags.h4, **numbers)


# critical curves

SIGN_CHARS = {'+': 1, '-': -1, '−': -1}


@dataclass
class CriticalSpec:
    """Radii and signs of a critical curve.

    `signature` holds the signs of the interior arcs (each sweeping pi); the
    curve has len(signature) + 2 arcs, the end arcs taking the alternating
    signs. An empty signature describes one or two arcs, the first with
    `leading_sign`.
    """
    rho0: float
    radii: Tuple[float, ...]
    signature: str = ''
    start_sweep: float = 0.5 * math.pi
    end_sweep: float = 0.5 * math.pi
    leading_sign: str = '+'

    def __post_init__(self):
        self.radii = tuple(float(r) for r in self.radii)
        self.signature = self.signature.replace('−', '-')
        self.leading_sign = self.leading_sign.replace('−', '-')

    @property
    def index(self) -> int:
        return len(self.signature)

    @property
    def arc_signs(self) -> List[int]:
        if self.signature:
            interior = [SIGN_CHARS[c] for c in self.signature]
            return [-interior[0]] + interior + [-interior[-1]]
        first = SIGN_CHARS[self.leading_sign]
        return [first, -first][:len(self.radii)]

    @property
    def jump_string(self) -> str:
        """Sign of each curvature jump, '+' for a jump from positive to negative"""
        signs = self.arc_signs
        return ''.join('+' if a > 0 else '-' for a, _ in zip(signs, signs[1:]))

    def validate(self):
        _check_rho0(self.rho0)
        if any(c not in SIGN_CHARS for c in self.signature) or self.leading_sign not in SIGN_CHARS:
            raise InvalidInputError(f"Signs must be '+' or '-', got {self.signature!r}")
        if any(a == b for a, b in zip(self.signature, self.signature[1:])):
            raise InvalidInputError(f"Signs must alternate, got {self.signature!r}")
        expected = (len(self.signature) + 2,) if self.signature else (1, 2)
        if len(self.radii) not in expected:
            raise InvalidInputError(f"Signature {self.signature!r} needs {expected[0]} radii, got {len(self.radii)}")
        for r in self.radii:
            if not radius_admissible(r, self.rho0):
                raise InvalidInputError(f"Radius {r} outside the admissible bands for rho0 = {self.rho0}")
        for sweep in (self.start_sweep, self.end_sweep):
            if not 0.0 <= sweep < math.pi:
                raise InvalidInputError(f"End-arc sweep {sweep} outside [0, pi)")


def radius_admissible(r: float, rho0: float) -> bool:
    return rho0 < r < HALF_PI - rho0 or HALF_PI + rho0 < r < math.pi - rho0


@dataclass
class CriticalReport:
    items: Dict[str, bool]
    signature: str
    index: int
    self_intersections: int

    @property
    def valid(self) -> bool:
        return all(v for k, v in self.items.items() if k != 'simple')


def generate_critical(spec: CriticalSpec, start=IDENTITY) -> PiecewiseArcCurve:
    """Alternating arcs, interior ones sweeping pi, all centers on one great circle"""
    spec.validate()
    frame = check_rotation(start, 'start frame', tol=1e-9)
    count = len(spec.radii)
    arcs = []
    for k, (radius, sign) in enumerate(zip(spec.radii, spec.arc_signs)):
        if k == 0:
            sweep = spec.start_sweep
        elif k == count - 1:
            sweep = spec.end_sweep
        else:
            sweep = math.pi
        orientation = 'ccw' if sign * math.cos(radius) > 0.0 else 'cw'
        arc = OrientedArc.from_frame(frame, radius, orientation, sweep)
        arcs.append(arc)
        frame = arc.end_frame
    curve = PiecewiseArcCurve(start, arcs)
    report = validate_critical(curve, spec.rho0)
    logger.info(f"Critical curve {spec.signature or spec.leading_sign!r}: items={report.items}")
    if not report.valid:
        raise ContractError(f"Generated curve fails the critical-curve checks: {report.items}")
    return curve


def validate_critical(curve: PiecewiseArcCurve, rho0: float, samples: int = 400) -> CriticalReport:
    arcs = curve.arcs
    signs = [1 if arc.curvature > 0 else -1 if arc.curvature < 0 else 0 for arc in arcs]
    interior = arcs[1:-1]
    items = {
        'arcs': len(arcs) >= 1,
        'radii': all(radius_admissible(arc.radius, rho0) for arc in arcs),
        'lengths': all(abs(arc.sweep - math.pi) < 1e-9 for arc in interior)
                   and all(arc.sweep < math.pi for arc in (arcs[0], arcs[-1])),
        'centers_on_great_circle': _on_one_great_circle([arc.center for arc in arcs]),
        'alternating': all(s != 0 for s in signs) and all(a == -b for a, b in zip(signs, signs[1:])),
    }
    crossings = count_self_intersections(curve, samples) if curve.length > 0.0 else 0
    items['simple'] = crossings == 0
    signature = ''.join('+' if s > 0 else '-' for s in signs[1:-1])
    return CriticalReport(items, signature, len(signature), crossings)


def _on_one_great_circle(centers: List[np.ndarray]) -> bool:
    if len(centers) < 3:
        return True
    singular = np.linalg.svd(np.array(centers), compute_uv=False)
    return bool(singular[-1] < 1e-9)


def count_self_intersections(curve: PiecewiseArcCurve, samples: int = 400) -> int:
    """Crossings between non-adjacent chords of a sampled curve"""
    pts = curve.sample(samples).points
    a, b = pts[:-1], pts[1:]
    normals = np.cross(a, b)
    side_c = normals @ a.T
    side_d = normals @ b.T
    straddle_ab = side_c * side_d < 0.0
    straddle_cd = straddle_ab.T
    same_side = (a + b) @ (a + b).T > 0.0
    hits = straddle_ab & straddle_cd & same_side
    hits = np.triu(hits, k=2)
    return int(np.count_nonzero(hits))


# curvature bounds and the triviality set


def symmetrize_bounds(kappa1: float, kappa2: float, Q) -> Tuple[float, np.ndarray, float]:
    """Turn bounds (kappa1, kappa2) into the symmetric (-kappa0, kappa0) and conjugate Q to match"""
    if not kappa1 < kappa2:
        raise InvalidInputError(f"Need kappa1 < kappa2, got ({kappa1}, {kappa2})")
    Q = check_rotation(Q, 'Q', tol=1e-9)
    rho1 = math.atan2(1.0, kappa1)
    rho2 = math.atan2(1.0, kappa2)
    spread = rho1 - rho2
    rho2_bar = 0.5 * (math.pi - spread)
    theta = rho2 - rho2_bar
    kappa0 = math.inf if rho2_bar == 0.0 else math.cos(rho2_bar) / math.sin(rho2_bar)
    Q_sym = rotation_about_axis(E2, -theta) @ Q @ rotation_about_axis(E2, theta)
    return kappa0, Q_sym, theta


def twisted_frame(theta: float, vartheta: float, rho: float) -> np.ndarray:
    """The frame Q~(theta, vartheta, rho) whose rotation field about v matches at both ends"""
    v = np.array([-math.cos(theta), 0.0, -math.sin(theta)])
    p = np.array([math.cos(theta + vartheta), 0.0, math.sin(theta + vartheta)])
    q = np.array([-math.sin(theta), 0.0, math.cos(theta)])
    x = rotation_about_axis(v, rho) @ p
    t = rotation_about_axis(v, rho + HALF_PI) @ q
    return np.column_stack([x, t, np.cross(x, t)])


@dataclass
class TrivialWitness:
    theta: float
    vartheta: float
    rho: float
    residual: float

    @property
    def axis(self) -> np.ndarray:
        return np.array([-math.cos(self.theta), 0.0, -math.sin(self.theta)])


def trivial_witness(Q, rho0: float, tol: float = 1e-8) -> Optional[TrivialWitness]:
    """Search for (theta, vartheta, rho) with Q~ = Q and both colatitudes inside (rho0, pi - rho0)"""
    _check_rho0(rho0)
    Q = check_rotation(Q, 'Q', tol=1e-9)
    lower = [rho0, rho0, -math.pi]
    upper = [math.pi - rho0, math.pi - rho0, 3.0 * math.pi]

    def residual(params):
        return (twisted_frame(*params) - Q).ravel()

    starts = [(a, b, c)
              for a in np.linspace(lower[0], upper[0], 6)[1:-1]
              for b in np.linspace(lower[1], upper[1], 6)[1:-1]
              for c in np.linspace(0.0, 2.0 * math.pi, 8, endpoint=False)]
    for start in starts:
        fit = least_squares(residual, start, bounds=(lower, upper), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        error = float(np.max(np.abs(fit.fun)))
        if error > tol:
            continue
        theta, vartheta, rho = (float(x) for x in fit.x)
        witness = TrivialWitness(theta, vartheta, rho % (2.0 * math.pi), error)
        colatitudes = (sphere_distance(witness.axis, E1), sphere_distance(witness.axis, Q[:, 0]))
        if all(rho0 < c < math.pi - rho0 for c in colatitudes):
            return witness
    return None
