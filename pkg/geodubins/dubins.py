"""
Spherical Dubins paths: CSC and CCC candidates, selection, and a sweep oracle
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from django.conf import settings
from scipy.optimize import brentq

from .arcs_curves import HALF_PI, OrientedArc, PiecewiseArcCurve
from .exceptions import ContractError, InfeasibleError, InvalidInputError
from .sphere_core import (
    IDENTITY, TWO_PI, angle_about, check_rotation, circle_intersections, frame_deviation, left_center,
    longitude, normalize, right_center, sphere_distance,
)

logger = logging.getLogger(__name__)

# case id -> (start circle orientation, end circle orientation)
CSC_CASES: Dict[str, Tuple[str, str]] = {
    'C1SC3': ('ccw', 'ccw'),
    'C1SC4': ('ccw', 'cw'),
    'C2SC3': ('cw', 'ccw'),
    'C2SC4': ('cw', 'cw'),
}
CCC_TYPES: Dict[str, str] = {'LRL': 'ccw', 'RLR': 'cw'}

SNAP_TOL = 1e-10


@dataclass(eq=False)
class CscSolution:
    case: str
    geodesic_choice: int
    alpha: float
    theta: float
    beta: float
    length: float
    rho: float
    curve: PiecewiseArcCurve
    kind: str = 'CSC'

    def metadata(self) -> Dict:
        return {'type': self.kind, 'case': self.case, 'geodesic_choice': self.geodesic_choice,
                'alpha': self.alpha, 'theta': self.theta, 'beta': self.beta,
                'length': self.length, 'rho': self.rho}


@dataclass(eq=False)
class CccSolution:
    pattern: str
    middle_side: str
    alpha: float
    lam: float
    beta: float
    length: float
    rho: float
    curve: PiecewiseArcCurve
    centers: Tuple[np.ndarray, np.ndarray, np.ndarray] = field(default=None, repr=False)
    kind: str = 'CCC'

    def metadata(self) -> Dict:
        return {'type': self.kind, 'case': self.pattern, 'middle_side': self.middle_side,
                'alpha': self.alpha, 'lambda': self.lam, 'beta': self.beta,
                'length': self.length, 'rho': self.rho}


Solution = Union[CscSolution, CccSolution]


def _check_problem(P, Q, rho: float) -> Tuple[np.ndarray, np.ndarray]:
    if not 0.0 < rho < HALF_PI:
        raise InvalidInputError(f"Turning radius {rho} outside (0, pi/2)")
    return check_rotation(P, 'start frame', tol=1e-9), check_rotation(Q, 'target frame', tol=1e-9)


def _sweep(center, orientation: str, a, b) -> float:
    """Angle swept along the oriented circle about center from a to b"""
    turn = angle_about(center, a, b) if orientation == 'ccw' else angle_about(center, b, a)
    return 0.0 if turn > TWO_PI - SNAP_TOL else turn


def _end_center(frame, rho: float, orientation: str) -> np.ndarray:
    center = left_center(frame, rho) if orientation == 'ccw' else right_center(frame, rho)
    return center / np.linalg.norm(center)


def _finish(arcs: List[OrientedArc], P, Q_local, reasons: List[str], label: str) -> Optional[PiecewiseArcCurve]:
    """Assemble arcs from the identity frame, verify the target, map back by P"""
    tol = settings.GEODUBINS_CONFIG['FRAME_TOL']
    try:
        # zero sweeps drop out; the remaining junctions are checked at JUNCTION_TOL
        raw = PiecewiseArcCurve(IDENTITY, [arc for arc in arcs if arc.sweep > 0.0])
    except ContractError as e:
        reasons.append(f"{label}: junction_mismatch ({e.deviation:.1e})")
        return None
    # the target is checked in the identity chart, before P carries the curve to the real start
    deviation = frame_deviation(raw.end_frame, Q_local)
    if deviation > tol:
        reasons.append(f"{label}: frame_mismatch ({deviation:.1e})")
        return None
    return raw if P is IDENTITY else raw.transformed(P)


def _dedup(solutions: List[Solution]) -> List[Solution]:
    length_tol = settings.GEODUBINS_CONFIG['DEDUP_LENGTH_TOL']
    frame_tol = settings.GEODUBINS_CONFIG['DEDUP_FRAME_TOL']
    kept: List[Solution] = []
    for candidate in solutions:
        duplicate = False
        for other in kept:
            if abs(candidate.length - other.length) > length_tol:
                continue
            probes = (0.25, 0.5, 0.75)
            if all(frame_deviation(candidate.curve.frame_at_length(f * candidate.length),
                                   other.curve.frame_at_length(f * other.length)) < frame_tol
                   for f in probes):
                duplicate = True
                break
        if not duplicate:
            kept.append(candidate)
    return kept


def _tangent_normals(c1, a1: float, c2, a2: float) -> Tuple[List[np.ndarray], str]:
    """Unit m with <m, c1> = a1 and <m, c2> = a2"""
    g = float(np.dot(c1, c2))
    denom = 1.0 - g * g
    if denom < 1e-14:
        return [], 'antipodal_centers' if g < 0.0 else 'coincident_centers'
    coef1 = (a1 - g * a2) / denom
    coef2 = (a2 - g * a1) / denom
    base = coef1 * c1 + coef2 * c2
    cross = np.cross(c1, c2)
    gamma_sq = (1.0 - float(np.dot(base, base))) / float(np.dot(cross, cross))
    if gamma_sq < -1e-14:
        return [], 'no_common_tangent'
    gamma = math.sqrt(max(gamma_sq, 0.0))
    return [normalize(base + gamma * cross), normalize(base - gamma * cross)], ''


def csc_candidates(P, Q, rho: float, diagnostics: Optional[List[str]] = None) -> List[CscSolution]:
    """All realizable arc-geodesic-arc curves from P to Q with turning radius rho"""
    P, Q = _check_problem(P, Q, rho)
    local = P.T @ Q
    P = IDENTITY if frame_deviation(P, IDENTITY) == 0.0 else P
    reasons: List[str] = [] if diagnostics is None else diagnostics
    sin_rho, cos_rho = math.sin(rho), math.cos(rho)
    start = IDENTITY[:, 0]
    target = local[:, 0]
    solutions: List[CscSolution] = []

    for case, (o1, o2) in CSC_CASES.items():
        c1 = _end_center(IDENTITY, rho, o1)
        c2 = _end_center(local, rho, o2)
        a1 = sin_rho if o1 == 'ccw' else -sin_rho
        a2 = sin_rho if o2 == 'ccw' else -sin_rho
        normals, reason = _tangent_normals(c1, a1, c2, a2)
        if reason == 'coincident_centers' and o1 == o2:
            alpha = _sweep(c1, o1, start, target)
            arc = OrientedArc.from_frame(IDENTITY, rho, o1, alpha)
            curve = _finish([arc], P, local, reasons, case)
            if curve is not None:
                solutions.append(CscSolution(case, 1, alpha, 0.0, 0.0, alpha * sin_rho, rho, curve))
            continue
        if not normals:
            reasons.append(f"{case}: {reason}")
            continue
        for choice, m in enumerate(normals, start=1):
            x1 = normalize((c1 - a1 * m) / cos_rho)
            x2 = normalize((c2 - a2 * m) / cos_rho)
            alpha = _sweep(c1, o1, start, x1)
            theta = angle_about(m, x1, x2)
            theta = 0.0 if theta > TWO_PI - SNAP_TOL else theta
            beta = _sweep(c2, o2, x2, target)
            arcs = [
                OrientedArc.from_frame(IDENTITY, rho, o1, alpha),
                OrientedArc(m, HALF_PI, 'ccw', longitude(m, x1), theta),
                OrientedArc(c2, rho, o2, longitude(c2, x2), beta),
            ]
            curve = _finish(arcs, P, local, reasons, f"{case}/{choice}")
            if curve is None:
                continue
            length = theta + (alpha + beta) * sin_rho
            solutions.append(CscSolution(case, choice, alpha, theta, beta, length, rho, curve))

    for reason in reasons:
        logger.debug(f"CSC candidate omitted: {reason}")
    return _dedup(solutions)


def csc_closed_form(P, Q, rho: float, case: str, wrap: bool = False) -> Dict[str, float]:
    """Geodesic angle of a CSC case from the two circle centres alone.

    Same-side circles: cos(theta) = <c1,c2>/cos^2(rho) - tan^2(rho).
    Opposite sides:    cos(theta) = <c1,c2>/cos^2(rho) + tan^2(rho).
    theta is evaluated through the equivalent half-angle form, which stays
    accurate near theta = 0; `wrap` selects the reflex branch 2pi - theta.
    """
    P, Q = _check_problem(P, Q, rho)
    if case not in CSC_CASES:
        raise InvalidInputError(f"Unknown CSC case {case!r}")
    o1, o2 = CSC_CASES[case]
    local = P.T @ Q
    c1 = _end_center(IDENTITY, rho, o1)
    c2 = _end_center(local, rho, o2)
    cos_rho = math.cos(rho)
    d = sphere_distance(c1, c2)
    tan_sq = math.tan(rho) ** 2
    if o1 == o2:
        cos_theta = float(np.dot(c1, c2)) / cos_rho ** 2 - tan_sq
        half_sin = math.sin(0.5 * d) / cos_rho
    else:
        cos_theta = float(np.dot(c1, c2)) / cos_rho ** 2 + tan_sq
        product = math.sin(0.5 * d - rho) * math.sin(0.5 * d + rho)
        if product < -1e-12:
            return {'cos_theta': cos_theta, 'theta': float('nan'), 'feasible': False}
        half_sin = math.sqrt(max(product, 0.0)) / cos_rho
    theta = 2.0 * math.asin(min(1.0, half_sin))
    if wrap:
        theta = TWO_PI - theta
    return {'cos_theta': cos_theta, 'theta': theta, 'feasible': half_sin <= 1.0 + 1e-12}


def closed_form_length(solution: CscSolution, P, Q) -> float:
    """theta + (alpha + beta) sin(rho), theta from the centre formula"""
    closed = csc_closed_form(P, Q, solution.rho, solution.case, wrap=solution.theta > math.pi)
    return closed['theta'] + (solution.alpha + solution.beta) * math.sin(solution.rho)


def ccc_candidates(P, Q, rho: float, diagnostics: Optional[List[str]] = None) -> List[CccSolution]:
    """All realizable arc-arc-arc curves from P to Q with turning radius rho"""
    P, Q = _check_problem(P, Q, rho)
    local = P.T @ Q
    P = IDENTITY if frame_deviation(P, IDENTITY) == 0.0 else P
    reasons: List[str] = [] if diagnostics is None else diagnostics
    sin_rho = math.sin(rho)
    start = IDENTITY[:, 0]
    target = local[:, 0]
    solutions: List[CccSolution] = []

    for pattern, outer in CCC_TYPES.items():
        inner = 'cw' if outer == 'ccw' else 'ccw'
        c1 = _end_center(IDENTITY, rho, outer)
        c3 = _end_center(local, rho, outer)
        d13 = sphere_distance(c1, c3)
        if d13 > 4.0 * rho + 1e-12:
            reasons.append(f"{pattern}: centers_too_far ({d13:.6f} > 4 rho)")
            continue
        middles = _middle_centers(c1, c3, rho)
        if not middles:
            reasons.append(f"{pattern}: coincident_outer_circles")
            continue
        for cm in middles:
            side = 'left' if float(np.dot(np.cross(c1, c3), cm)) > 0.0 else 'right'
            t1 = normalize(c1 + cm)
            t2 = normalize(cm + c3)
            alpha = _sweep(c1, outer, start, t1)
            lam = _sweep(cm, inner, t1, t2)
            beta = _sweep(c3, outer, t2, target)
            arcs = [
                OrientedArc.from_frame(IDENTITY, rho, outer, alpha),
                OrientedArc(cm, rho, inner, longitude(cm, t1), lam),
                OrientedArc(c3, rho, outer, longitude(c3, t2), beta),
            ]
            curve = _finish(arcs, P, local, reasons, f"{pattern}/{side}")
            if curve is None:
                continue
            if not (min(alpha, beta) < math.pi and lam > math.pi):
                logger.debug(f"CCC {pattern}/{side} outside the side conditions "
                             f"(alpha={alpha:.4f}, lambda={lam:.4f}, beta={beta:.4f})")
            length = (alpha + lam + beta) * sin_rho
            solutions.append(CccSolution(pattern, side, alpha, lam, beta, length, rho, curve, (c1, cm, c3)))

    for reason in reasons:
        logger.debug(f"CCC candidate omitted: {reason}")
    return _dedup(solutions)


def _middle_centers(c1, c3, rho: float) -> List[np.ndarray]:
    return circle_intersections(c1, 2.0 * rho, c3, 2.0 * rho)


def shortest_csc(P, Q, rho: float) -> Optional[CscSolution]:
    candidates = csc_candidates(P, Q, rho)
    return min(candidates, key=lambda s: s.length) if candidates else None


def shortest_path(P, Q, rho: float) -> Solution:
    """Minimum-length element of the CSC and CCC candidates"""
    reasons: List[str] = []
    candidates: List[Solution] = csc_candidates(P, Q, rho, reasons) + ccc_candidates(P, Q, rho, reasons)
    if not candidates:
        raise InfeasibleError(f"No CSC or CCC path with radius {rho}", reasons)
    best = min(candidates, key=lambda s: s.length)
    if best.kind == 'CCC':
        _report_ccc_winner(P, Q, rho, best)
    return best


def _report_ccc_winner(P, Q, rho: float, best: CccSolution):
    from .config_index import index_numbers

    if not 0.0 < rho < math.pi / 4:
        return
    local = np.asarray(P).T @ np.asarray(Q)
    n_q = index_numbers(local, rho)['n_Q']
    if n_q is not None and n_q >= 1:
        logger.warning(f"CCC minimizer (length {best.length:.9f}) although n_Q = {n_q}")


def sweep_oracle(P, Q, rho: float, grid: Optional[int] = None) -> float:
    """Shortest length found by scanning the first-arc angle and solving for the remaining pieces"""
    P, Q = _check_problem(P, Q, rho)
    grid = grid or settings.GEODUBINS_CONFIG['ORACLE_GRID']
    local = P.T @ Q
    sin_rho, cos_rho = math.sin(rho), math.cos(rho)
    target = local[:, 0]
    angles = np.linspace(0.0, TWO_PI, grid + 1)
    best = math.inf

    for o1 in ('ccw', 'cw'):
        first = OrientedArc.from_frame(IDENTITY, rho, o1, TWO_PI)

        def frame(alpha):
            positions, tangents = first.points([alpha])
            x, t = positions[0], tangents[0]
            return x, t, np.cross(x, t)

        positions, tangents = first.points(angles)
        normals = np.cross(positions, tangents)

        # first arc, geodesic, last arc
        for o2 in ('ccw', 'cw'):
            c2 = _end_center(local, rho, o2)
            a2 = sin_rho if o2 == 'ccw' else -sin_rho

            def residual(alpha, c2=c2, a2=a2):
                return float(np.dot(frame(alpha)[2], c2)) - a2

            values = normals @ c2 - a2
            for alpha in _roots(residual, angles, values):
                x1, _, m = frame(alpha)
                x2 = normalize((c2 - a2 * m) / cos_rho)
                theta = angle_about(m, x1, x2)
                beta = _sweep(c2, o2, x2, target)
                best = min(best, alpha * sin_rho + theta + beta * sin_rho)

        # three arcs
        inner = 'cw' if o1 == 'ccw' else 'ccw'
        c3 = _end_center(local, rho, o1)
        sign = -1.0 if o1 == 'ccw' else 1.0
        middles = cos_rho * positions + sign * sin_rho * normals

        def residual(alpha, c3=c3, sign=sign):
            x, _, n = frame(alpha)
            return sphere_distance(normalize(cos_rho * x + sign * sin_rho * n), c3) - 2.0 * rho

        values = np.arctan2(np.linalg.norm(np.cross(middles, c3), axis=1), middles @ c3) - 2.0 * rho
        for alpha in _roots(residual, angles, values):
            x, _, n = frame(alpha)
            cm = normalize(cos_rho * x + sign * sin_rho * n)
            t2 = normalize(cm + c3)
            lam = _sweep(cm, inner, x, t2)
            beta = _sweep(c3, o1, t2, target)
            best = min(best, (alpha + lam + beta) * sin_rho)

    if not math.isfinite(best):
        raise InfeasibleError("Sweep oracle found no path")
    return best


def _roots(fn, angles: np.ndarray, values: np.ndarray) -> List[float]:
    roots = [float(a) for a, v in zip(angles[:-1], values[:-1]) if v == 0.0]
    crossings = np.nonzero(values[:-1] * values[1:] < 0.0)[0]
    maxiter = settings.GEODUBINS_CONFIG['ORACLE_BISECTIONS']
    for k in crossings:
        roots.append(brentq(fn, angles[k], angles[k + 1], xtol=1e-15, rtol=4.5e-16, maxiter=maxiter))
    return roots
