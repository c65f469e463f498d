"""3-D geometry primitives: axis rotations, mirror reflections, direction
angles and the Euler factorization used by the reflection path model.

Vectors are numpy arrays of shape (3,), matrices of shape (3, 3). All angles
are radians; angle-valued results are wrapped to (-pi, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Plane",
    "dir_to_angles",
    "euler_factor_so3",
    "householder",
    "reflect_point",
    "rotation_matrix",
    "spherical_dir",
    "unit",
    "wrap_angle",
    "z_reflection",
]

_EYE3 = np.eye(3)

# Below this, a direction is considered numerically parallel to the z axis and
# the azimuth of the gimbal-locked frame is pinned to 0.
_POLE_EPS = 1e-9


def wrap_angle(angle: float) -> float:
    """Wrap an angle to the interval (-pi, pi]."""
    a = math.remainder(float(angle), 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    return a


def unit(v: np.ndarray) -> np.ndarray:
    """Return v scaled to unit length; rejects (near-)zero input."""
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n < 1e-15:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """Right-handed rotation matrix about a coordinate axis ("x", "y" or "z")."""
    c = math.cos(angle)
    s = math.sin(angle)
    if axis == "x":
        return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    if axis == "y":
        return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    if axis == "z":
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    raise ValueError(f"unknown axis {axis!r}, expected 'x', 'y' or 'z'")


def z_reflection(s: int) -> np.ndarray:
    """diag(1, 1, s): identity for s = +1, mirror through the x-y plane for s = -1."""
    if s not in (-1, 1):
        raise ValueError(f"reflection parity must be -1 or +1, got {s!r}")
    return np.diag([1.0, 1.0, float(s)])


def householder(u: np.ndarray) -> np.ndarray:
    """Householder mirror I - 2 u u^T across the plane with unit normal u."""
    u = np.asarray(u, dtype=float)
    n = float(np.linalg.norm(u))
    if abs(n - 1.0) > 1e-9:
        raise ValueError(f"mirror normal must be unit length, got |u| = {n}")
    return _EYE3 - 2.0 * np.outer(u, u)


@dataclass(frozen=True)
class Plane:
    """Plane {x : normal . x = intercept} with a unit normal."""

    normal: np.ndarray
    intercept: float

    def __post_init__(self) -> None:
        n = np.asarray(self.normal, dtype=float)
        if n.shape != (3,):
            raise ValueError("plane normal must be a 3-vector")
        length = float(np.linalg.norm(n))
        if abs(length - 1.0) > 1e-9:
            raise ValueError(f"plane normal must be unit length, got {length}")
        object.__setattr__(self, "normal", n / length)
        object.__setattr__(self, "intercept", float(self.intercept))

    def signed_distance(self, p: np.ndarray) -> float:
        return float(self.normal @ np.asarray(p, dtype=float)) - self.intercept


def reflect_point(p: np.ndarray, plane: Plane) -> np.ndarray:
    """Mirror image of point p across the plane."""
    p = np.asarray(p, dtype=float)
    return p - 2.0 * plane.signed_distance(p) * plane.normal


def euler_factor_so3(m: np.ndarray) -> tuple[float, float, float]:
    """Factor a rotation as M = R_x(gamma) @ R_y(theta) @ R_z(-phi).

    Returns (gamma, theta, phi) with theta in [-pi/2, pi/2] and gamma, phi in
    (-pi, pi]. Near gimbal lock (|cos theta| < 1e-9) the split between gamma
    and phi is not unique and the canonical solution with gamma = 0 is
    returned. Raises ValueError when M is not a proper rotation.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise ValueError("expected a 3x3 matrix")
    if float(np.max(np.abs(m.T @ m - _EYE3))) > 1e-9:
        raise ValueError("matrix is not orthogonal")
    if float(np.linalg.det(m)) < 0.0:
        raise ValueError("matrix has determinant -1, not a proper rotation")

    theta = math.asin(max(-1.0, min(1.0, float(m[0, 2]))))
    if math.cos(theta) < _POLE_EPS:
        # First row is +-e_z: gamma and phi act about the same axis.
        gamma = 0.0
        phi = math.atan2(-m[1, 0], m[1, 1])
    else:
        phi = math.atan2(m[0, 1], m[0, 0])
        gamma = math.atan2(-m[1, 2], m[2, 2])
    return wrap_angle(gamma), theta, wrap_angle(phi)


def spherical_dir(azimuth: float, elevation: float) -> np.ndarray:
    """Unit direction (cos az cos el, sin az cos el, sin el)."""
    ca = math.cos(azimuth)
    sa = math.sin(azimuth)
    ce = math.cos(elevation)
    se = math.sin(elevation)
    return np.array([ca * ce, sa * ce, se])


def dir_to_angles(u: np.ndarray) -> tuple[float, float]:
    """(azimuth, elevation) of a unit vector; inverse of spherical_dir.

    At the poles the azimuth is undefined and 0 is returned.
    """
    u = np.asarray(u, dtype=float)
    n = float(np.linalg.norm(u))
    if abs(n - 1.0) > 1e-9:
        raise ValueError(f"direction must be unit length, got |u| = {n}")
    elevation = math.asin(max(-1.0, min(1.0, float(u[2]))))
    if math.hypot(float(u[0]), float(u[1])) < _POLE_EPS:
        return 0.0, elevation
    return wrap_angle(math.atan2(float(u[1]), float(u[0]))), elevation
