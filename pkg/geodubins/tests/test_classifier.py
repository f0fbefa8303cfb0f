import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geodubins import classifier
from geodubins.arcs_curves import OrientedArc, PiecewiseArcCurve, add_loops
from geodubins.classifier import (
    Lune, basepoint, classify, default_radius, dense_sample_count, epsilon_index, estimate_radius, extract_sequence,
    g_coordinates, g_coordinates_exhaustive, g_map, good_subsequences, hemispheric_axis, on_boundary,
    sphere_projection, scaled_coordinates,
)
from geodubins.config_index import CriticalSpec, endpoint_centers, generate_critical
from geodubins.exceptions import InvalidInputError, ResolutionError
from geodubins.sphere_core import E3, IDENTITY, normalize

from .factories import chain, geodesic, rz


def dense_samples(curve, epsilon):
    return curve.sample(dense_sample_count(curve, epsilon))


@pytest.mark.parametrize('x, expected', [
    ([], 0),
    ([1.0], 0),
    ([0.0, 0.0, 1.0], 0),
    ([1.0, 0.0, 1.0], 1),
    ([0.0, 0.0, 0.0, 0.0, 1.0], 1),
    ([0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0], 3),
    ([0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0], 3),
    # three excursions: x_0, x_1, x_2 > 0, x_3 = 0, x_4, x_5, x_6 > 0
    ([0.4, 0.2, 0.3, 0.0, 0.5, 0.1, 0.6], 3),
    ([0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0], 4),
])
def test_epsilon_index(x, expected):
    assert epsilon_index(x) == expected


def test_g_coordinates_of_a_single_chain():
    result = g_coordinates([2.0, 0.0, 3.0], 2)
    assert result.y == [6.0, 0.0]
    assert g_coordinates([0.0, 5.0], 1).y == [5.0]


def test_g_coordinates_match_exhaustive_enumeration():
    rng = np.random.default_rng(5)
    for _ in range(300):
        length = int(rng.integers(1, 13))
        x = [float(v) if rng.random() < 0.6 else 0.0 for v in rng.integers(1, 5, size=length)]
        n_q = int(rng.integers(1, 8))
        assert g_coordinates(x, n_q).y == g_coordinates_exhaustive(x, n_q).y


@settings(deadline=None, max_examples=200)
@given(st.lists(st.integers(min_value=0, max_value=3), max_size=10), st.integers(min_value=1, max_value=6))
def test_g_coordinates_match_exhaustive_on_small_supports(values, n_q):
    x = [float(v) for v in values]
    assert g_coordinates(x, n_q).y == g_coordinates_exhaustive(x, n_q).y


def test_skipped_positions_need_zero_entries():
    # z_0 must be x_0 whenever z_1 = x_1, so x_1 never opens a chain on its own here
    assert good_subsequences([1.0, 2.0]) == {(), ((0, 0),), ((0, 0), (1, 1))}
    assert g_coordinates([1.0, 2.0], 1).y == [2.0]
    assert g_coordinates([0.0, 2.0], 1).y == [2.0]


def test_three_zeros_end_a_good_subsequence():
    x = [1.0, 0.0, 0.0, 0.0, 5.0]
    assert ((0, 0), (4, 4)) not in good_subsequences(x)
    assert g_coordinates(x, 2).y == g_coordinates_exhaustive(x, 2).y == [0.0, 0.0]


@settings(deadline=None, max_examples=100)
@given(st.lists(st.sampled_from([0.0, 0.5, 1.0, 2.0]), max_size=11))
def test_good_subsequences_respect_the_index_congruence(x):
    for picked in good_subsequences(x):
        positions = [position for position, _ in picked]
        indices = [index for _, index in picked]
        assert all(index % 4 == position % 4 for position, index in picked)
        assert indices == sorted(set(indices))
        assert all(x[index] != 0.0 for index in indices)
        if picked:
            assert positions[0] <= 3
            assert all(0 < b - a <= 3 for a, b in zip(positions, positions[1:]))


@settings(deadline=None, max_examples=200)
@given(st.lists(st.floats(min_value=0.0, max_value=3.0).map(lambda v: 0.0 if v < 1.0 else v), max_size=9),
       st.integers(min_value=1, max_value=5))
def test_g_coordinates_match_exhaustive_on_real_entries(x, n_q):
    fast = g_coordinates(x, n_q).y
    slow = g_coordinates_exhaustive(x, n_q).y
    assert fast == pytest.approx(slow, rel=1e-12, abs=1e-12)


def test_on_boundary():
    assert on_boundary(SimpleNamespace(x=[1.0, 0.0, 3.0]))
    assert on_boundary(SimpleNamespace(x=[0.0, 2.0]))
    assert not on_boundary(SimpleNamespace(x=[4.0, 0.0, 0.0, 0.0, 1.0]))
    assert not on_boundary(SimpleNamespace(x=[]))


def test_estimate_radius_halves_the_smallest_boundary_norm(monkeypatch):
    corpus = {'two_tangent_bands': [1.0, 0.0, 3.0], 'position_band': [0.0, 2.0], 'inner': [4.0]}
    monkeypatch.setattr(classifier, '_n_q', lambda Q, rho0: 2)
    monkeypatch.setattr(classifier, 'extract_sequence', lambda curve, Q, rho0, epsilon: SimpleNamespace(x=corpus[curve]))
    monkeypatch.setattr(classifier, 'in_c0', lambda curve, extraction, rho0: True)
    assert estimate_radius(list(corpus), IDENTITY, 0.2, 0.02) == pytest.approx(1.0)
    assert estimate_radius(['inner'], IDENTITY, 0.2, 0.02) is None


def test_default_radius_prefers_the_configured_value(monkeypatch):
    monkeypatch.setitem(classifier.settings.GEODUBINS_CONFIG, 'G_RADIUS', 0.25)
    assert default_radius(rz(1.0), 0.2, 0.02) == 0.25
    monkeypatch.setitem(classifier.settings.GEODUBINS_CONFIG, 'G_RADIUS', None)
    monkeypatch.setattr(classifier, '_family_radius', lambda q_key, rho0, epsilon: 0.5)
    assert default_radius(rz(1.0), 0.2, 0.02) == 0.5


def test_zero_coordinates_skip_the_radius_estimate(monkeypatch):
    def fail(*args):
        raise AssertionError("radius estimated for y = 0")

    monkeypatch.setitem(classifier.settings.GEODUBINS_CONFIG, 'G_RADIUS', None)
    monkeypatch.setattr(classifier, '_family_radius', fail)
    point = g_map(geodesic(1.0).sample(401), rz(1.0), 0.2, 0.02)
    np.testing.assert_allclose(point, [0.0, 1.0], atol=1e-12)


def test_sphere_projection():
    np.testing.assert_allclose(sphere_projection([0.0, 0.0]), [0.0, 0.0, 1.0], atol=1e-15)
    point = sphere_projection([0.3, -0.7, 1.0])
    assert np.linalg.norm(point) == pytest.approx(1.0)


def test_scaled_coordinates_clamp_to_the_unit_ball():
    np.testing.assert_allclose(scaled_coordinates([1e-7, 0.0], 1e-6), [0.1, 0.0])
    np.testing.assert_allclose(scaled_coordinates([3.0, 4.0], 1e-6), [0.6, 0.8])


def test_basepoint():
    np.testing.assert_array_equal(basepoint(3), [0.0, 0.0, 0.0, -1.0])


def test_axis_of_an_equator_arc():
    Q = rz(1.0)
    result = hemispheric_axis(geodesic(1.0).sample(401), endpoint_centers(Q, 0.2))
    np.testing.assert_allclose(result.axis, [-math.sin(0.5), math.cos(0.5), 0.0], atol=1e-6)
    assert result.value == pytest.approx(math.cos(0.5), abs=1e-6)
    assert result.hemispheric
    assert not result.degenerate


def test_axis_of_a_short_arc_bisects_its_end_tangents():
    arc = OrientedArc.from_frame(IDENTITY, 0.5, 'ccw', 1.0)
    curve = PiecewiseArcCurve(IDENTITY, [arc])
    sampled = curve.sample(801)
    result = hemispheric_axis(sampled, endpoint_centers(arc.end_frame, 0.2))
    expected = normalize(sampled.tangents[0] + sampled.tangents[-1])
    np.testing.assert_allclose(result.axis, expected, atol=1e-3)


def test_axis_of_a_semicircle_is_degenerate():
    arc = OrientedArc.from_frame(IDENTITY, 0.5, 'ccw', math.pi)
    sampled = PiecewiseArcCurve(IDENTITY, [arc]).sample(801)
    result = hemispheric_axis(sampled, endpoint_centers(arc.end_frame, 0.2))
    assert result.degenerate


def test_lune_distances():
    lune = Lune(E3, np.array([1.0, 0.0, 0.0]), -0.5, 0.5)
    inside = np.array([[1.0, 0.0, 0.0]])
    assert lune.distances(inside)[0] == 0.0
    outside = np.array([[math.cos(0.8), math.sin(0.8), 0.0]])
    assert lune.distances(outside)[0] == pytest.approx(0.3)
    assert lune.nearest_edge(outside[0]) == 0.5


def test_tight_geodesic_has_no_excursions():
    extraction = extract_sequence(geodesic(1.0).sample(401), rz(1.0), 0.2, 0.02)
    assert all(value == 0.0 for value in extraction.x)
    assert epsilon_index(extraction.x) == 0


def test_extraction_needs_dense_samples():
    with pytest.raises(ResolutionError):
        extract_sequence(geodesic(1.0).sample(20), rz(1.0), 0.2, 0.02)


def test_extraction_needs_a_small_epsilon():
    with pytest.raises(InvalidInputError):
        extract_sequence(geodesic(1.0).sample(401), rz(1.0), 0.2, 0.025)


def test_g_map_of_a_tight_geodesic_is_the_pole():
    point = g_map(geodesic(1.0).sample(401), rz(1.0), 0.2, 0.02)
    np.testing.assert_allclose(point, [0.0, 1.0], atol=1e-12)


def test_curve_outside_the_class_maps_to_the_basepoint():
    looped = add_loops(geodesic(1.0), 0.5, 1)
    result = classify(looped.sample(2001), rz(1.0), 0.2, 0.02)
    assert not result.inside
    np.testing.assert_array_equal(result.point, basepoint(1))
    assert set(result.as_dict()) >= {'x', 'index', 'y', 'n_Q', 'in_c0', 'point', 'v_gamma', 'm_gamma'}


def test_classify_needs_a_positive_index():
    with pytest.raises(InvalidInputError):
        classify(geodesic(0.01).sample(3), IDENTITY, 0.2, 0.02)


@pytest.mark.parametrize('signature, slots, index', [
    ('-+-+', {0, 2, 4, 6, 8}, 4),
    ('+-+-', {2, 4, 6, 8, 10}, 4),
])
def test_critical_curves_visit_the_tangent_bands(signature, slots, index):
    rho0, epsilon = 0.1, 0.01
    curve = generate_critical(CriticalSpec(rho0, (0.13,) * 6, signature))
    extraction = extract_sequence(dense_samples(curve, epsilon), curve.end_frame, rho0, epsilon)
    even = {k for k, value in enumerate(extraction.x) if value != 0.0 and k % 2 == 0}
    assert even == slots
    assert (extraction.x[0] != 0.0) == (0 in slots)
    assert epsilon_index(extraction.x) >= index
