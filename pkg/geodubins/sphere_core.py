"""
Spherical geometry primitives: unit vectors, rotations, frames, polar charts
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from .exceptions import InvalidInputError, PoleError

logger = logging.getLogger(__name__)

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])
IDENTITY = np.eye(3)

UNIT_TOL = 1e-10
TWO_PI = 2.0 * math.pi


def as_vector(v) -> np.ndarray:
    """Coerce to a float 3-vector"""
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise InvalidInputError(f"Expected a 3-vector, got shape {arr.shape}")
    return arr


def normalize(v) -> np.ndarray:
    """Scale to unit norm"""
    arr = as_vector(v)
    norm = np.linalg.norm(arr)
    if norm < 1e-300 or not np.isfinite(norm):
        raise InvalidInputError("Cannot normalize a zero or non-finite vector")
    return arr / norm


def check_unit(v, name: str = 'vector', tol: float = UNIT_TOL) -> np.ndarray:
    """Return v as an array after checking it has unit norm"""
    arr = as_vector(v)
    deviation = abs(np.linalg.norm(arr) - 1.0)
    if deviation > tol:
        raise InvalidInputError(f"{name} is not a unit vector (|norm - 1| = {deviation:.3e})")
    return arr


def is_rotation(matrix, tol: float = UNIT_TOL) -> bool:
    """Orthogonal with determinant +1"""
    m = np.asarray(matrix, dtype=float)
    if m.shape != (3, 3) or not np.all(np.isfinite(m)):
        return False
    if np.max(np.abs(m.T @ m - IDENTITY)) > tol:
        return False
    return abs(np.linalg.det(m) - 1.0) <= tol


def check_rotation(matrix, name: str = 'rotation', tol: float = UNIT_TOL) -> np.ndarray:
    m = np.asarray(matrix, dtype=float)
    if not is_rotation(m, tol):
        raise InvalidInputError(f"{name} is not a proper rotation matrix")
    return m


def rotation_about_axis(v, rho: float) -> np.ndarray:
    """Right-handed rotation by rho about the unit axis v"""
    axis = check_unit(v, 'rotation axis')
    return Rotation.from_rotvec(axis * float(rho)).as_matrix()


def sphere_distance(a, b) -> float:
    """Great-circle distance in [0, pi]"""
    a = as_vector(a)
    b = as_vector(b)
    cos_part = float(np.clip(np.dot(a, b), -1.0, 1.0))
    sin_part = float(np.linalg.norm(np.cross(a, b)))
    return math.atan2(sin_part, cos_part)


def exp_map(p, w) -> np.ndarray:
    """Follow the geodesic from p with initial velocity w for time 1"""
    p = check_unit(p, 'base point')
    w = as_vector(w)
    if abs(np.dot(p, w)) > UNIT_TOL * max(1.0, np.linalg.norm(w)):
        raise InvalidInputError("Velocity is not tangent at the base point")
    speed = np.linalg.norm(w)
    if speed == 0.0:
        return p.copy()
    return math.cos(speed) * p + math.sin(speed) * (w / speed)


@dataclass(frozen=True)
class PolarCoordinate:
    colatitude: float
    longitude: float
    axis: Tuple[float, float, float]


def reference_basis(axis) -> Tuple[np.ndarray, np.ndarray]:
    """Orthonormal (u1, u2) spanning the plane normal to axis; u1 on the zero meridian"""
    axis = as_vector(axis)
    u1 = E1 - np.dot(E1, axis) * axis
    if np.linalg.norm(u1) < 1e-8:
        u1 = E2 - np.dot(E2, axis) * axis
    u1 = u1 / np.linalg.norm(u1)
    u2 = np.cross(axis, u1)
    return u1, u2


def longitude(axis, u, basis: Tuple[np.ndarray, np.ndarray] = None) -> float:
    """Longitude of u about axis in [-pi, pi)"""
    u1, u2 = basis if basis is not None else reference_basis(axis)
    phi = math.atan2(float(np.dot(u, u2)), float(np.dot(u, u1)))
    if phi >= math.pi:
        phi -= TWO_PI
    return phi


def polar_coords(axis, u) -> PolarCoordinate:
    axis = check_unit(axis, 'axis')
    u = check_unit(u, 'point')
    if np.linalg.norm(np.cross(axis, u)) < 1e-12:
        raise PoleError("Longitude is undefined at the poles of the chart")
    return PolarCoordinate(
        colatitude=sphere_distance(axis, u),
        longitude=longitude(axis, u),
        axis=tuple(float(c) for c in axis),
    )


def from_polar(axis, colatitude: float, phi: float) -> np.ndarray:
    """Inverse of polar_coords"""
    axis = check_unit(axis, 'axis')
    u1, u2 = reference_basis(axis)
    return math.cos(colatitude) * axis + math.sin(colatitude) * (math.cos(phi) * u1 + math.sin(phi) * u2)


def angle_about(axis, a, b) -> float:
    """Counter-clockwise turn about axis carrying the meridian of a to that of b, in [0, 2pi)"""
    basis = reference_basis(axis)
    turn = (longitude(axis, b, basis) - longitude(axis, a, basis)) % TWO_PI
    return 0.0 if turn >= TWO_PI else turn


def wrap_angle(phi: float) -> float:
    """Map into [-pi, pi)"""
    return (phi + math.pi) % TWO_PI - math.pi


def circle_intersections(c1, r1: float, c2, r2: float, tol: float = 1e-12) -> List[np.ndarray]:
    """Points at distance r1 from c1 and r2 from c2"""
    c1 = as_vector(c1)
    c2 = as_vector(c2)
    g = float(np.dot(c1, c2))
    normal = np.cross(c1, c2)
    denom = 1.0 - g * g
    if denom < 1e-15:
        return []
    a1 = math.cos(r1)
    a2 = math.cos(r2)
    alpha = (a1 - g * a2) / denom
    beta = (a2 - g * a1) / denom
    base = alpha * c1 + beta * c2
    gamma_sq = (1.0 - float(np.dot(base, base))) / float(np.dot(normal, normal))
    if gamma_sq < -tol:
        return []
    if gamma_sq <= tol:
        return [normalize(base)]
    gamma = math.sqrt(gamma_sq)
    return [normalize(base + gamma * normal), normalize(base - gamma * normal)]


def frame_from_columns(position, tangent) -> np.ndarray:
    """Frenet frame with columns (position, tangent, position x tangent)"""
    x = as_vector(position)
    t = as_vector(tangent)
    return np.column_stack([x, t, np.cross(x, t)])


def frame_deviation(a, b) -> float:
    """Largest entry-wise difference between two frames"""
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def rotation_distance(a, b) -> float:
    """Frobenius distance between two rotations"""
    return float(np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


def left_center(frame, radius: float) -> np.ndarray:
    return math.cos(radius) * frame[:, 0] + math.sin(radius) * frame[:, 2]


def right_center(frame, radius: float) -> np.ndarray:
    return math.cos(radius) * frame[:, 0] - math.sin(radius) * frame[:, 2]


def fibonacci_sphere(count: int) -> np.ndarray:
    """Nearly uniform point set on S^2"""
    k = np.arange(count, dtype=float) + 0.5
    z = 1.0 - 2.0 * k / count
    radius = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = math.pi * (3.0 - math.sqrt(5.0)) * k
    return np.column_stack([radius * np.cos(phi), radius * np.sin(phi), z])
