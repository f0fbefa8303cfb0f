import itertools
import math

import numpy as np
import pytest

from geodubins.dubins import shortest_csc, shortest_path
from geodubins.exceptions import InvalidInputError
from geodubins.shortening import (
    STOP_CAP, STOP_STALLED, STOP_ZERO_PASSES, ShorteningSchedule, classify_segments, collapse_short_runs,
    dyadic_offsets, shorten, shorten_pass,
)
from geodubins.sphere_core import IDENTITY, frame_deviation

from .factories import chain, geodesic, random_wiggly, rz, wiggly


def test_dyadic_offsets():
    assert list(itertools.islice(dyadic_offsets(), 8)) == [0.5, 1.0, 0.25, 0.5, 0.75, 1.0, 0.125, 0.25]


def test_schedule_defaults():
    schedule = ShorteningSchedule.for_radius(0.2)
    assert schedule.section == pytest.approx(math.pi * math.sin(0.2))
    assert schedule.max_passes == 10000
    with pytest.raises(InvalidInputError):
        ShorteningSchedule.for_radius(0.2, section=1.0)
    with pytest.raises(InvalidInputError):
        ShorteningSchedule.for_radius(0.2, max_passes=-1)


def test_zero_passes_is_the_identity():
    curve = wiggly()
    result = shorten(curve, 0.2, ShorteningSchedule.for_radius(0.2, max_passes=0))
    assert result.curve is curve
    assert result.reason == STOP_ZERO_PASSES
    assert result.passes == 0
    assert result.trace == [(0, 0.0, curve.length)]


def test_minimizer_is_a_fixed_point():
    curve = shortest_csc(IDENTITY, rz(1.0), 0.2).curve
    result = shorten(curve, 0.2)
    assert result.curve.length == pytest.approx(curve.length, abs=1e-10)
    assert result.reason == STOP_STALLED


def test_wiggly_curve_shortens_to_the_optimum():
    rho0 = 0.2
    curve = wiggly()
    result = shorten(curve, rho0)
    lengths = [length for _, _, length in result.trace]
    assert all(b <= a + 1e-9 for a, b in zip(lengths, lengths[1:]))
    assert frame_deviation(result.curve.start_frame, curve.start_frame) < 1e-9
    assert frame_deviation(result.curve.end_frame, curve.end_frame) < 1e-9
    optimum = shortest_path(IDENTITY, curve.end_frame, rho0).length
    assert result.curve.length == pytest.approx(optimum, abs=1e-4)
    assert result.curve.max_abs_curvature() <= 1.0 / math.tan(rho0) + 1e-9
    report = classify_segments(result.curve, rho0)
    assert report.unclassified == []
    assert report.violations == []


def test_pass_cap_stops_early():
    result = shorten(wiggly(), 0.2, ShorteningSchedule.for_radius(0.2, max_passes=1))
    assert result.reason == STOP_CAP
    assert result.passes == 1
    assert result.trace[1][1] == 0.5


def test_single_pass_keeps_end_frames():
    curve = wiggly(count=10, radius=0.8, sweep=0.4)
    section = math.pi * math.sin(0.2)
    shortened = shorten_pass(curve, 0.2, 0.5, section)
    assert shortened.length <= curve.length + 1e-12
    assert frame_deviation(shortened.end_frame, curve.end_frame) < 1e-8


def test_shorten_pass_rejects_bad_offsets():
    with pytest.raises(InvalidInputError):
        shorten_pass(wiggly(), 0.2, 1.5, 0.5)


def test_classify_segments_of_a_geodesic():
    report = classify_segments(geodesic(1.0), 0.2)
    assert report.labels == ['0']
    assert report.violations == []


def test_classify_segments_flags_short_turns():
    rho0 = 0.2
    curve = chain(IDENTITY, [(0.5 * math.pi, 'ccw', 0.5), (rho0, 'ccw', 0.3), (0.5 * math.pi, 'ccw', 0.5)])
    report = classify_segments(curve, rho0)
    assert report.labels == ['0', '+', '0']
    assert report.violations == [1]
    assert report.unclassified == []


def test_classify_segments_reports_unknown_curvature():
    report = classify_segments(chain(IDENTITY, [(0.7, 'cw', 1.0)]), 0.2)
    assert report.labels == ['?']
    assert report.unclassified[0]['arc'] == 0


def test_wiggly_sections_plan_without_junction_errors():
    rho0 = 0.2
    curve = wiggly()
    section = math.pi * math.sin(rho0)
    s = 0.0
    while s + section < curve.length:
        piece = curve.segment(s, s + section)
        path = shortest_path(piece.start_frame, piece.end_frame, rho0)
        assert path.length <= piece.length + 1e-12
        assert frame_deviation(path.curve.end_frame, piece.end_frame) < 1e-8
        s += 0.5 * section


def test_wiggly_curve_stalls_instead_of_failing():
    result = shorten(wiggly(), 0.2)
    assert result.reason == STOP_STALLED


def test_collapse_replaces_a_short_turn_between_geodesics():
    rho0 = 0.2
    curve = chain(IDENTITY, [(0.5 * math.pi, 'ccw', 0.5), (rho0, 'ccw', 0.3), (0.5 * math.pi, 'ccw', 0.5)])
    collapsed, count = collapse_short_runs(curve, rho0)
    assert count == 1
    assert classify_segments(collapsed, rho0).violations == []
    assert collapsed.length == pytest.approx(shortest_path(IDENTITY, curve.end_frame, rho0).length, abs=1e-12)
    assert frame_deviation(collapsed.end_frame, curve.end_frame) < 1e-9


def test_collapse_shortens_repeated_short_turns():
    rho0 = 0.2
    side = 0.5 * math.pi
    curve = chain(IDENTITY, [(rho0, 'ccw', 2.0), (side, 'ccw', 0.3), (rho0, 'ccw', 0.15), (side, 'ccw', 0.3),
                             (rho0, 'ccw', 0.15), (side, 'ccw', 0.3), (rho0, 'ccw', 2.0)])
    assert classify_segments(curve, rho0).violations == [2, 4]
    collapsed, count = collapse_short_runs(curve, rho0)
    assert count >= 1
    assert collapsed.length < curve.length - 1e-6
    assert frame_deviation(collapsed.start_frame, curve.start_frame) < 1e-12
    assert frame_deviation(collapsed.end_frame, curve.end_frame) < 1e-9


def test_collapse_leaves_minimizers_alone():
    curve = shortest_csc(IDENTITY, rz(1.0), 0.2).curve
    collapsed, count = collapse_short_runs(curve, 0.2)
    assert count == 0
    assert collapsed is curve


def test_random_wiggly_curves_reach_the_optimum():
    rho0 = 0.2
    rng = np.random.default_rng(2024)
    for _ in range(50):
        curve = random_wiggly(rng)
        result = shorten(curve, rho0)
        lengths = [length for _, _, length in result.trace]
        assert all(b <= a + 1e-9 for a, b in zip(lengths, lengths[1:]))
        assert frame_deviation(result.curve.start_frame, curve.start_frame) < 1e-9
        assert frame_deviation(result.curve.end_frame, curve.end_frame) < 1e-9
        report = classify_segments(result.curve, rho0)
        assert report.unclassified == []
        assert report.violations == []
        optimum = shortest_path(IDENTITY, curve.end_frame, rho0).length
        assert result.curve.length == pytest.approx(optimum, abs=1e-4)
