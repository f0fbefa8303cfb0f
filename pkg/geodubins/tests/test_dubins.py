import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geodubins.dubins import (
    CSC_CASES, ccc_candidates, closed_form_length, csc_candidates, csc_closed_form, shortest_csc,
    shortest_path, sweep_oracle,
)
from geodubins.config_index import index_numbers
from geodubins.exceptions import InvalidInputError
from geodubins.shortening import classify_segments
from geodubins.sphere_core import IDENTITY, frame_deviation, sphere_distance

from .factories import random_rotations, rotations, rz


@settings(deadline=None, max_examples=100)
@given(rotations(), st.floats(min_value=0.05, max_value=math.pi / 4))
def test_csc_closed_form_matches_the_realized_curve(Q, rho):
    for solution in csc_candidates(IDENTITY, Q, rho):
        assert closed_form_length(solution, IDENTITY, Q) == pytest.approx(solution.length, abs=1e-8)
        assert solution.curve.length == pytest.approx(solution.length, abs=1e-9)
        assert frame_deviation(solution.curve.end_frame, Q) < 1e-8


@settings(deadline=None, max_examples=50)
@given(rotations(), st.floats(min_value=0.05, max_value=math.pi / 4))
def test_ccc_candidates_reach_the_target(Q, rho):
    for solution in ccc_candidates(IDENTITY, Q, rho):
        assert solution.curve.length == pytest.approx(solution.length, abs=1e-9)
        assert frame_deviation(solution.curve.end_frame, Q) < 1e-8
        assert solution.curve.max_abs_curvature() <= 1.0 / math.tan(rho) + 1e-9


@pytest.mark.parametrize('theta', [0.5, 1.0, 2.0, 3.0])
def test_turn_about_the_pole_is_a_geodesic(theta):
    solution = shortest_path(IDENTITY, rz(theta), 0.2)
    assert solution.kind == 'CSC'
    assert solution.length == pytest.approx(theta, abs=1e-10)


def test_same_side_closed_form_for_a_geodesic():
    closed = csc_closed_form(IDENTITY, rz(1.0), 0.2, 'C1SC3')
    assert closed['feasible']
    assert closed['theta'] == pytest.approx(1.0, abs=1e-12)
    assert closed['cos_theta'] == pytest.approx(math.cos(1.0), abs=1e-12)


def test_closed_form_rejects_unknown_cases():
    with pytest.raises(InvalidInputError):
        csc_closed_form(IDENTITY, rz(1.0), 0.2, 'C1SC5')
    assert set(CSC_CASES) == {'C1SC3', 'C1SC4', 'C2SC3', 'C2SC4'}


def test_planner_matches_the_sweep_oracle():
    rng = np.random.default_rng(7)
    for Q in random_rotations(12, seed=11):
        rho = float(rng.uniform(0.05, math.pi / 4))
        planned = shortest_path(IDENTITY, Q, rho)
        assert planned.length == pytest.approx(sweep_oracle(IDENTITY, Q, rho), abs=1e-6)


def test_planner_is_left_invariant():
    P = random_rotations(1, seed=3)[0]
    Q = rz(1.3)
    moved = shortest_path(P, P @ Q, 0.25)
    base = shortest_path(IDENTITY, Q, 0.25)
    assert moved.length == pytest.approx(base.length, abs=1e-9)
    assert frame_deviation(moved.curve.start_frame, P) < 1e-9
    assert frame_deviation(moved.curve.end_frame, P @ Q) < 1e-8


@settings(deadline=None, max_examples=40)
@given(rotations(), st.floats(min_value=0.05, max_value=math.pi / 4))
def test_shortest_path_bounds(Q, rho):
    solution = shortest_path(IDENTITY, Q, rho)
    assert solution.length >= sphere_distance(IDENTITY[:, 0], Q[:, 0]) - 1e-12
    assert solution.curve.max_abs_curvature() <= 1.0 / math.tan(rho) + 1e-9
    best_csc = shortest_csc(IDENTITY, Q, rho)
    if best_csc is not None:
        assert solution.length <= best_csc.length + 1e-12


def test_planner_rejects_bad_radius():
    with pytest.raises(InvalidInputError):
        shortest_path(IDENTITY, rz(1.0), 0.5 * math.pi)
    with pytest.raises(InvalidInputError):
        shortest_path(IDENTITY, np.diag([1.0, 1.0, -1.0]), 0.2)


def test_solution_metadata():
    metadata = shortest_path(IDENTITY, rz(1.0), 0.2).metadata()
    assert metadata['type'] == 'CSC'
    assert metadata['length'] == pytest.approx(1.0)
    assert metadata['rho'] == 0.2
    assert metadata['case'] in CSC_CASES


@settings(deadline=None, max_examples=60)
@given(rotations(), st.floats(min_value=0.05, max_value=0.7))
def test_center_distances_differ_by_at_most_four_radii(Q, rho0):
    numbers = index_numbers(Q, rho0)
    assert abs(numbers['L1'] - numbers['L2']) <= 4.0 * rho0 + 1e-9
    assert abs(numbers['D1'] - numbers['D2']) <= 4.0 * rho0 + 1e-9


@settings(deadline=None, max_examples=60)
@given(rotations(), st.floats(min_value=0.05, max_value=math.pi / 4))
def test_minimizers_have_long_interior_turns(Q, rho):
    solution = shortest_path(IDENTITY, Q, rho)
    report = classify_segments(solution.curve, rho)
    assert report.unclassified == []
    assert report.violations == []


@settings(deadline=None, max_examples=60)
@given(rotations(), st.floats(min_value=0.05, max_value=math.pi / 4))
def test_minimizer_labels_follow_the_path_type(Q, rho):
    solution = shortest_path(IDENTITY, Q, rho)
    labels = ''.join(classify_segments(solution.curve, rho).labels)
    assert len(labels) <= 3
    if solution.kind == 'CCC':
        assert '0' not in labels
        assert all(a != b for a, b in zip(labels, labels[1:]))
    else:
        assert labels.count('0') <= 1
        assert '0' not in labels or labels.strip('+-') == '0'
