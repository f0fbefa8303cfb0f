import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geodubins.classifier import dense_sample_count, epsilon_index, extract_sequence, g_coordinates, in_c0
from geodubins.config_index import CriticalSpec, generate_critical
from geodubins.exceptions import InvalidInputError
from geodubins.family_generator import (
    FamilyParams, alpha_segment, control_trajectories, f_bar, family_grid, reduce_configuration, thresholds,
)
from geodubins.sphere_core import IDENTITY, frame_deviation, sphere_distance

from .factories import rz


@pytest.fixture(scope='module')
def params():
    return FamilyParams.from_configuration(rz(2.0), 0.2)


def test_parameters_for_a_turn_about_the_pole(params):
    assert params.n_q == 4
    assert params.delta0 == pytest.approx(0.002339, abs=1e-5)
    assert params.rho_tilde == pytest.approx(0.2 + 0.5 * params.delta0)
    assert params.varsigma == pytest.approx(2.02573, abs=1e-4)

    single = FamilyParams.from_configuration(rz(1.0), 0.2)
    assert single.n_q == 1
    assert single.delta0 == pytest.approx(0.03572, abs=1e-4)


def test_parameters_need_a_positive_index():
    with pytest.raises(InvalidInputError):
        FamilyParams.from_configuration(IDENTITY, 0.2)
    with pytest.raises(InvalidInputError):
        FamilyParams.from_configuration(rz(2.0), 0.2, rho_tilde=0.19)


def test_reduction_of_a_turn_about_the_pole(params):
    reduction = reduce_configuration(params)
    assert reduction.span == pytest.approx(2.0, abs=1e-9)
    assert sum(arc.length for arc in reduction.head + reduction.tail) < 1e-9


def test_zero_parameter_gives_the_geodesic(params):
    curve = f_bar(params, [0.0] * params.n_q).simplified()
    assert len(curve) == 1
    assert curve.arcs[0].is_geodesic
    assert curve.length == pytest.approx(2.0, abs=1e-7)


@settings(deadline=None, max_examples=30)
@given(st.lists(st.floats(min_value=-2 * math.pi, max_value=2 * math.pi), min_size=4, max_size=4))
def test_control_circles_stay_tangent(params, x):
    traj = control_trajectories(params)
    for i, value in enumerate(x, start=1):
        left, right = traj.left(i, value), traj.right(i, value)
        assert sphere_distance(left, right) == pytest.approx(2.0 * params.rho_tilde, abs=1e-9)


@settings(deadline=None, max_examples=20)
@given(st.lists(st.floats(min_value=-math.pi, max_value=math.pi), min_size=4, max_size=4))
def test_family_curves_join_the_end_frames(params, x):
    curve = f_bar(params, x)
    assert frame_deviation(curve.start_frame, IDENTITY) < 1e-12
    assert frame_deviation(curve.end_frame, params.Q) < 1e-8
    assert curve.max_abs_curvature() <= 1.0 / math.tan(params.rho_tilde) + 1e-6


def test_ring_spiral_gains_a_full_turn(params):
    traj = control_trajectories(params)
    lower, _ = thresholds(traj, 1, 0.0)
    once = alpha_segment(traj, 1, 0.0, lower - 1.0)
    twice = alpha_segment(traj, 1, 0.0, lower - 1.0 - 2.0 * math.pi)
    ring = 2.0 * math.pi * math.sin(3.0 * params.rho_tilde)
    assert twice.length - once.length == pytest.approx(ring, abs=1e-9)


def test_thresholds_bracket_the_parameter(params):
    traj = control_trajectories(params)
    lower, upper = thresholds(traj, 1, 0.3)
    assert lower <= 0.3 <= upper
    with pytest.raises(InvalidInputError):
        thresholds(traj, params.n_q, 0.0)


def test_first_segment_loops_about_the_start_circle():
    params = FamilyParams.from_configuration(rz(1.0), 0.2)
    curve = f_bar(params, [2.0 * math.pi])
    assert max(arc.sweep for arc in curve.arcs) > math.pi
    assert frame_deviation(curve.end_frame, rz(1.0)) < 1e-8


def test_family_needs_one_parameter_per_index(params):
    with pytest.raises(InvalidInputError):
        f_bar(params, [0.0])


def test_family_grid_keeps_order(params):
    points = [[0.0] * 4, [0.5, 0.0, 0.0, 0.0]]
    curves = family_grid(params, points)
    assert len(curves) == 2
    assert curves[0].length == pytest.approx(2.0, abs=1e-7)
    np.testing.assert_allclose(curves[1].end_frame, params.Q, atol=1e-8)


@settings(deadline=None, max_examples=30)
@given(st.floats(min_value=-2 * math.pi, max_value=2 * math.pi),
       st.floats(min_value=-2 * math.pi, max_value=2 * math.pi))
def test_neighbouring_control_circles_never_overlap(params, t1, t2):
    traj = control_trajectories(params)
    for i in range(1, params.n_q):
        assert sphere_distance(traj.left(i, t1), traj.right(i + 1, t2)) >= 2.0 * params.rho_tilde - 1e-10
        assert sphere_distance(traj.right(i, t1), traj.left(i + 1, t2)) >= 2.0 * params.rho_tilde - 1e-10


def test_thresholds_are_where_the_circles_touch(params):
    traj = control_trajectories(params)
    lower, upper = thresholds(traj, 1, 0.3)
    touching = 2.0 * params.rho_tilde
    assert sphere_distance(traj.right(1, 0.3), traj.left(2, lower)) == pytest.approx(touching, abs=1e-9)
    assert sphere_distance(traj.left(1, 0.3), traj.right(2, upper)) == pytest.approx(touching, abs=1e-8)


def test_spiral_closes_onto_a_csc_curve_at_the_lower_threshold(params):
    traj = control_trajectories(params)
    lower, _ = thresholds(traj, 1, 0.3)
    near = alpha_segment(traj, 1, 0.3, lower - 1e-9)
    nearer = alpha_segment(traj, 1, 0.3, lower - 2e-9)
    at = alpha_segment(traj, 1, 0.3, lower)
    assert near.length == pytest.approx(nearer.length, abs=1e-6)
    assert frame_deviation(near.end_frame, at.end_frame) < 1e-7
    assert at.length <= near.length + 1e-6


def test_spirals_turn_with_the_side_of_the_threshold(params):
    traj = control_trajectories(params)
    ring = 3.0 * params.rho_tilde
    lower, upper = thresholds(traj, 1, 0.3)
    for x_next, orientation in ((lower - 2.0 * math.pi - 0.5, 'cw'), (upper + 2.0 * math.pi + 0.5, 'ccw')):
        segment = alpha_segment(traj, 1, 0.3, x_next)
        spiral = [arc for arc in segment.arcs if arc.radius == pytest.approx(ring, abs=1e-12)]
        assert len(spiral) == 1
        assert spiral[0].orientation == orientation
        assert spiral[0].sweep > math.pi
        assert spiral[0].length > math.pi * math.sin(ring)


def test_family_curves_move_continuously(params):
    x = np.array([0.37, 0.41, 0.29, 0.33])
    base = f_bar(params, x)
    moved = f_bar(params, x + 1e-7)
    assert moved.length == pytest.approx(base.length, abs=1e-5)
    a, b = base.sample(400), moved.sample(400)
    assert np.max(np.abs(a.points - b.points)) < 1e-5
    assert np.max(np.abs(a.tangents - b.tangents)) < 1e-5


def test_g_coordinates_move_continuously_with_the_curve():
    rho0, epsilon = 0.1, 0.01
    curves = [generate_critical(CriticalSpec(rho0, (r,) * 4, '-+')) for r in (0.13, 0.13 + 1e-7)]
    count = dense_sample_count(curves[0], epsilon)
    x = [extract_sequence(c.sample(count), c.end_frame, rho0, epsilon).x for c in curves]
    assert len(x[0]) == len(x[1])
    np.testing.assert_allclose(x[0], x[1], atol=1e-4)
    y = [g_coordinates(values, 4).y for values in x]
    np.testing.assert_allclose(y[0], y[1], atol=1e-4)


def test_family_curves_in_the_class_stay_within_the_index(params):
    epsilon = 0.02
    rng = np.random.default_rng(5)
    points = [[0.0] * params.n_q] + [list(row) for row in rng.uniform(-math.pi, math.pi, size=(6, params.n_q))]
    for curve in family_grid(params, points):
        sampled = curve.sample(dense_sample_count(curve, epsilon))
        extraction = extract_sequence(sampled, params.Q, params.rho0, epsilon)
        if in_c0(sampled, extraction, params.rho0):
            assert epsilon_index(extraction.x) <= params.n_q


@pytest.mark.parametrize('signature', ['-+', '+-+', '-+-+'])
def test_index_grows_with_epsilon(signature):
    rho0 = 0.1
    curve = generate_critical(CriticalSpec(rho0, (0.13,) * (len(signature) + 2), signature))
    epsilons = [rho0 / 32, rho0 / 16, rho0 / 10]
    sampled = curve.sample(dense_sample_count(curve, epsilons[0]))
    indices = [epsilon_index(extract_sequence(sampled, curve.end_frame, rho0, e).x) for e in epsilons]
    assert indices == sorted(indices)
