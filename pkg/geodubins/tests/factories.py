"""Curve and rotation builders shared by the tests"""
import math

import numpy as np
from hypothesis import strategies as st

from geodubins.arcs_curves import HALF_PI, OrientedArc, PiecewiseArcCurve
from geodubins.sphere_core import E3, IDENTITY, normalize, rotation_about_axis

finite_angle = st.floats(min_value=-math.pi, max_value=math.pi, allow_nan=False, allow_infinity=False)


@st.composite
def unit_vectors(draw):
    coords = draw(st.tuples(*[st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)] * 3))
    v = np.array(coords)
    if np.linalg.norm(v) < 0.1:
        v = np.array([0.0, 0.0, 1.0])
    return normalize(v)


@st.composite
def rotations(draw):
    return rotation_about_axis(draw(unit_vectors()), draw(finite_angle))


def rz(theta: float) -> np.ndarray:
    return rotation_about_axis(E3, theta)


def geodesic(theta: float, frame=IDENTITY) -> PiecewiseArcCurve:
    return PiecewiseArcCurve(frame, [OrientedArc.from_frame(frame, HALF_PI, 'ccw', theta)])


def chain(frame, pieces) -> PiecewiseArcCurve:
    """Curve from (radius, orientation, sweep) pieces"""
    arcs = []
    current = frame
    for radius, orientation, sweep in pieces:
        arc = OrientedArc.from_frame(current, radius, orientation, sweep)
        arcs.append(arc)
        current = arc.end_frame
    return PiecewiseArcCurve(frame, arcs)


def wiggly(count: int = 6, radius: float = 1.0, sweep: float = 0.3) -> PiecewiseArcCurve:
    return chain(IDENTITY, [(radius, 'ccw' if k % 2 == 0 else 'cw', sweep) for k in range(count)])


def random_rotations(count: int, seed: int):
    rng = np.random.default_rng(seed)
    result = []
    for _ in range(count):
        axis = normalize(rng.normal(size=3))
        result.append(rotation_about_axis(axis, rng.uniform(-math.pi, math.pi)))
    return result


def random_wiggly(rng) -> PiecewiseArcCurve:
    """Alternating chain of 4 to 7 gentle arcs"""
    count = int(rng.integers(4, 8))
    pieces = [(float(rng.uniform(0.8, 1.3)), 'ccw' if k % 2 == 0 else 'cw', float(rng.uniform(0.15, 0.35)))
              for k in range(count)]
    return chain(IDENTITY, pieces)
