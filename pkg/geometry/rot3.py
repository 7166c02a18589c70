"""Rotation algebra on 3-vectors and 3x3 rotation matrices.

Conventions:
- RPY is extrinsic x-y-z: R(roll, pitch, yaw) = Rz(yaw) @ Ry(pitch) @ Rx(roll).
- Vectors are numpy arrays of shape (3,), rotations arrays of shape (3, 3).
- All functions are pure.
"""

from dataclasses import dataclass, field

import numpy as np

from utils.error_handler import DegenerateForce

DEFAULT_FORCE_EPS = 1e-8
# beyond this angle two directions are treated as antiparallel
ANTIPARALLEL_TOL = 1e-6
DEFAULT_AXIS = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class AxisAngle:
    """Rotation by `angle` in [0, pi] about the unit `axis`."""
    angle: float
    axis: np.ndarray = field(default_factory=lambda: DEFAULT_AXIS.copy())

    @property
    def vector(self) -> np.ndarray:
        """o = theta * r"""
        return self.angle * np.asarray(self.axis)

    def to_matrix(self) -> np.ndarray:
        return axis_angle_to_matrix(self.axis, self.angle)


def rot_x(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rpy_to_matrix(roll: float, pitch: float, yaw: float) -> np.ndarray:
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def matrix_to_rpy(R: np.ndarray) -> np.ndarray:
    """Inverse of rpy_to_matrix; pitch in [-pi/2, pi/2]."""
    R = np.asarray(R, dtype=float)
    pitch = -np.arcsin(np.clip(R[2, 0], -1.0, 1.0))
    if abs(R[2, 0]) < 1.0 - 1e-12:
        roll = np.arctan2(R[2, 1], R[2, 2])
        yaw = np.arctan2(R[1, 0], R[0, 0])
    else:
        # gimbal lock: only roll - yaw (or roll + yaw) is defined, put it all in yaw
        roll = 0.0
        yaw = np.arctan2(-R[0, 1], R[1, 1])
    return np.array([roll, pitch, yaw])


def skew(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    return np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])


def vee(S: np.ndarray) -> np.ndarray:
    """Inverse of skew for the antisymmetric part of S."""
    return 0.5 * np.array([S[2, 1] - S[1, 2], S[0, 2] - S[2, 0], S[1, 0] - S[0, 1]])


def axis_angle_to_matrix(axis, angle: float) -> np.ndarray:
    S = skew(axis)
    return np.eye(3) + np.sin(angle) * S + (1.0 - np.cos(angle)) * (S @ S)


def is_rotation(R: np.ndarray, tol: float = 1e-9) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    if np.max(np.abs(R.T @ R - np.eye(3))) >= tol:
        return False
    return abs(np.linalg.det(R) - 1.0) <= tol


def _orthogonal_unit(a: np.ndarray) -> np.ndarray:
    e = np.zeros(3)
    e[int(np.argmin(np.abs(a)))] = 1.0
    w = np.cross(a, e)
    return w / np.linalg.norm(w)


def rodrigues_between(f, f_d, eps: float = DEFAULT_FORCE_EPS) -> np.ndarray:
    """Rotation R_theta carrying the direction of f onto the direction of f_d.

    R_theta = I + s S(w) + (1 - c) S(w)^2 with c, s the cosine and sine of the angle
    between the vectors and w their normalized cross product.
    """
    f = np.asarray(f, dtype=float)
    f_d = np.asarray(f_d, dtype=float)
    nf = np.linalg.norm(f)
    nd = np.linalg.norm(f_d)
    if not nf > eps:
        raise DegenerateForce("measured force has no usable direction", norm=float(nf), eps=eps)
    if not nd > eps:
        raise DegenerateForce("desired force has no usable direction", norm=float(nd), eps=eps)

    a = f / nf
    b = f_d / nd
    cross = np.cross(a, b)
    s = np.linalg.norm(cross)
    c = float(np.dot(a, b))
    angle = np.arctan2(s, c)

    if angle > np.pi - ANTIPARALLEL_TOL:
        S = skew(_orthogonal_unit(a))
        return np.eye(3) + 2.0 * (S @ S)
    if s == 0.0:
        return np.eye(3)

    S = skew(cross / s)
    return np.eye(3) + s * S + (1.0 - c) * (S @ S)


def axis_angle_of(R: np.ndarray) -> AxisAngle:
    R = np.asarray(R, dtype=float)
    v = vee(R)  # = sin(theta) r
    sin_t = np.linalg.norm(v)
    cos_t = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    angle = float(np.arctan2(sin_t, cos_t))

    if angle < np.pi / 2:
        if sin_t == 0.0:
            return AxisAngle(0.0, DEFAULT_AXIS.copy())
        return AxisAngle(angle, v / sin_t)

    # near pi: r r^T = (sym(R) - cos I) / (1 - cos), read the dominant column
    B = (0.5 * (R + R.T) - cos_t * np.eye(3)) / (1.0 - cos_t)
    j = int(np.argmax(np.diag(B)))
    r = B[:, j] / np.sqrt(B[j, j])
    r = r / np.linalg.norm(r)
    if np.dot(r, v) < 0.0:
        r = -r
    return AxisAngle(angle, r)
