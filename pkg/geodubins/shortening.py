"""
Sectionwise curve shortening under a curvature bound, and segment classification of its limits
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from django.conf import settings

from .arcs_curves import OrientedArc, PiecewiseArcCurve
from .dubins import shortest_path
from .exceptions import InfeasibleError, InvalidInputError
from .sphere_core import frame_deviation
from .workers import parallel_map

logger = logging.getLogger(__name__)

LENGTH_SLACK = 1e-12
END_TOL = 1e-11

STOP_STALLED = 'stalled'
STOP_CAP = 'cap'
STOP_ZERO_PASSES = 'zero-passes'
STOP_INFEASIBLE = 'infeasible'


def dyadic_levels() -> Iterator[List[float]]:
    """Offset levels [1/2, 1], [1/4, 2/4, 3/4, 1], [1/8, ...]"""
    level = 1
    while True:
        denominator = 2 ** level
        yield [j / denominator for j in range(1, denominator + 1)]
        level += 1


def dyadic_offsets() -> Iterator[float]:
    for level in dyadic_levels():
        yield from level


@dataclass
class ShorteningSchedule:
    section: float
    max_passes: int
    stall_factor: float

    @classmethod
    def for_radius(cls, rho0: float, section: Optional[float] = None,
                   max_passes: Optional[int] = None) -> 'ShorteningSchedule':
        config = settings.GEODUBINS_CONFIG
        schedule = cls(
            section=section if section is not None else math.pi * math.sin(rho0),
            max_passes=max_passes if max_passes is not None else config['MAX_PASSES'],
            stall_factor=config['STALL_FACTOR'],
        )
        schedule.validate(rho0)
        return schedule

    def validate(self, rho0: float):
        if not 0.0 < rho0 < 0.5 * math.pi:
            raise InvalidInputError(f"rho0 = {rho0} outside (0, pi/2)")
        if not 0.0 < self.section <= math.pi * math.sin(rho0) + LENGTH_SLACK:
            raise InvalidInputError(f"Section length {self.section} outside (0, pi sin rho0]")
        if self.max_passes < 0:
            raise InvalidInputError("Pass cap must be non-negative")


@dataclass
class ShorteningResult:
    curve: PiecewiseArcCurve
    trace: List[Tuple[int, float, float]] = field(default_factory=list)
    reason: str = STOP_ZERO_PASSES

    @property
    def passes(self) -> int:
        return len(self.trace) - 1


def _cut_points(total: float, offset: float, section: float) -> List[float]:
    cuts = [0.0]
    position = offset * section
    while position < total - LENGTH_SLACK:
        if position > LENGTH_SLACK:
            cuts.append(position)
        position += section
    cuts.append(total)
    return cuts


def _shortcut(curve: PiecewiseArcCurve, rho0: float, s0: float, s1: float,
              gain: float = -LENGTH_SLACK) -> Optional[List[OrientedArc]]:
    """Arcs of the shortest path across [s0, s1] when it saves more than `gain`, else None"""
    old = curve.segment(s0, s1)
    new = shortest_path(old.start_frame, old.end_frame, rho0)
    if old.length - new.length <= gain:
        return None
    # only the piece reaching the curve end can move the global end frame
    if s1 >= curve.length and frame_deviation(new.curve.end_frame, old.end_frame) > END_TOL:
        logger.debug(f"Replacement of [{s0:.6f}, {s1:.6f}] rejected: end frame drift")
        return None
    return new.curve.arcs


def _replace_section(curve: PiecewiseArcCurve, rho0: float, s0: float, s1: float) -> List[OrientedArc]:
    if s1 - s0 <= LENGTH_SLACK:
        return curve.segment(s0, s1).arcs
    arcs = _shortcut(curve, rho0, s0, s1)
    return arcs if arcs is not None else curve.segment(s0, s1).arcs


def _joined(curve: PiecewiseArcCurve, arcs: List[OrientedArc]) -> PiecewiseArcCurve:
    tol = max(curve.tol, settings.GEODUBINS_CONFIG['FRAME_TOL'])
    return PiecewiseArcCurve(curve.start_frame, arcs, tol=tol).simplified()


def _pass(curve: PiecewiseArcCurve, rho0: float, offset: float,
          section: float) -> Tuple[PiecewiseArcCurve, Optional[str]]:
    if not 0.0 <= offset <= 1.0:
        raise InvalidInputError(f"Offset {offset} outside [0, 1]")
    cuts = _cut_points(curve.length, offset, section)
    try:
        pieces = parallel_map(lambda bounds: _replace_section(curve, rho0, *bounds), list(zip(cuts, cuts[1:])))
    except InfeasibleError as e:
        logger.warning(f"Shortening pass at offset {offset} aborted: {str(e)} {e.reasons}")
        return curve, str(e)
    return _joined(curve, [arc for piece in pieces for arc in piece]), None


def shorten_pass(curve: PiecewiseArcCurve, rho0: float, offset: float, section: float) -> PiecewiseArcCurve:
    """Replace every section by the shortest path between its end frames"""
    ShorteningSchedule(section, 0, 0.0).validate(rho0)
    shortened, _ = _pass(curve, rho0, offset, section)
    return shortened


def _window(segments: List[Dict], k: int, total: float) -> Tuple[float, float]:
    before, after = segments[k - 1], segments[k + 1]
    s0 = 0.0 if k == 1 else before['start']
    s1 = total if k + 2 == len(segments) else after['start'] + after['length']
    return s0, s1


def collapse_short_runs(curve: PiecewiseArcCurve, rho0: float,
                        tol: float = 1e-6) -> Tuple[PiecewiseArcCurve, int]:
    """Replace each interior turning run shorter than pi sin rho0, together with its two
    neighbouring runs, by the shortest path across them whenever that is strictly shorter.

    Sectionwise passes only push such runs along the curve a section at a time; a
    limit curve has none of them.
    """
    collapsed = 0
    tried = set()
    rounds = 4 * len(curve) + 8
    while rounds > 0:
        report = classify_segments(curve, rho0, tol)
        windows = [_window(report.segments, k, curve.length) for k in report.violations]
        windows = [w for w in windows if (round(w[0], 9), round(w[1], 9)) not in tried]
        if not windows:
            break
        rounds -= 1
        s0, s1 = windows[0]
        tried.add((round(s0, 9), round(s1, 9)))
        try:
            arcs = _shortcut(curve, rho0, s0, s1, gain=LENGTH_SLACK)
        except InfeasibleError as e:
            logger.debug(f"Run collapse over [{s0:.6f}, {s1:.6f}] infeasible: {str(e)}")
            continue
        if arcs is None:
            continue
        head = curve.segment(0.0, s0).arcs
        tail = curve.segment(s1, curve.length).arcs
        curve = _joined(curve, head + arcs + tail)
        collapsed += 1
        tried.clear()
    return curve, collapsed


def shorten(curve: PiecewiseArcCurve, rho0: float, schedule: Optional[ShorteningSchedule] = None) -> ShorteningResult:
    """Iterate passes over the dyadic offsets, collapsing short runs after each level,
    until a full level stops paying off"""
    schedule = schedule or ShorteningSchedule.for_radius(rho0)
    schedule.validate(rho0)
    initial = curve.length
    result = ShorteningResult(curve, [(0, 0.0, initial)])
    if schedule.max_passes == 0:
        return result
    stall_tol = schedule.stall_factor * initial
    count = 0
    for level in dyadic_levels():
        level_start = result.curve.length
        for offset in level:
            shortened, failure = _pass(result.curve, rho0, offset, schedule.section)
            if failure is not None:
                result.reason = STOP_INFEASIBLE
                return result
            count += 1
            result.curve = shortened
            result.trace.append((count, offset, shortened.length))
            if count >= schedule.max_passes:
                result.reason = STOP_CAP
                logger.info(f"Shortening hit the pass cap ({count}) at length {shortened.length:.12f}")
                return result
        result.curve, collapsed = collapse_short_runs(result.curve, rho0)
        if collapsed:
            # the row closing the level carries the collapsed length
            result.trace[-1] = (count, level[-1], result.curve.length)
            logger.debug(f"Collapsed {collapsed} short runs after pass {count}")
        if level_start - result.curve.length <= stall_tol:
            result.reason = STOP_STALLED
            logger.info(f"Shortening stalled after {count} passes: {initial:.9f} -> {result.curve.length:.12f}")
            return result


@dataclass
class SegmentReport:
    kappa0: float
    segments: List[Dict] = field(default_factory=list)
    violations: List[int] = field(default_factory=list)
    unclassified: List[Dict] = field(default_factory=list)

    @property
    def labels(self) -> List[str]:
        return [s['label'] for s in self.segments]

    def as_dict(self) -> Dict:
        return {'kappa0': self.kappa0, 'segments': self.segments,
                'violations': self.violations, 'unclassified': self.unclassified}


def _label(curvature: float, kappa0: float, tol: float) -> Optional[str]:
    if abs(curvature) <= tol:
        return '0'
    if abs(curvature - kappa0) <= tol * max(1.0, kappa0):
        return '+'
    if abs(curvature + kappa0) <= tol * max(1.0, kappa0):
        return '-'
    return None


def classify_segments(curve: PiecewiseArcCurve, rho0: float, tol: float = 1e-6) -> SegmentReport:
    """Maximal constant-curvature runs labelled +kappa0, 0 or -kappa0"""
    kappa0 = math.cos(rho0) / math.sin(rho0)
    report = SegmentReport(kappa0)
    position = 0.0
    for k, arc in enumerate(curve.simplified().arcs):
        label = _label(arc.curvature, kappa0, tol)
        if label is None:
            report.unclassified.append({'arc': k, 'curvature': arc.curvature, 'length': arc.length})
            label = '?'
        if report.segments and report.segments[-1]['label'] == label:
            report.segments[-1]['length'] += arc.length
        else:
            report.segments.append({'label': label, 'start': position, 'length': arc.length,
                                    'curvature': arc.curvature})
        position += arc.length
    minimum = math.pi * math.sin(rho0) - tol
    for k, segment in enumerate(report.segments[1:-1], start=1):
        if segment['label'] in '+-' and segment['length'] < minimum:
            report.violations.append(k)
    if report.violations or report.unclassified:
        logger.debug(f"Segment report: violations={report.violations} unclassified={len(report.unclassified)}")
    return report
