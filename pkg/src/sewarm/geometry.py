"""Minimal 3-D geometry kernel: vectors, rotation matrices, coordinate frames.

Positions are meters, angles radians. Vectors are numpy arrays of shape (3,),
rotations are 3x3 orthonormal matrices with determinant +1, stored row-major.
Everything here is a pure function on value types and safe to call from any
thread.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Norm below which a direction/cross product is considered degenerate.
EPS_DEGENERATE = 1e-9

# Orthonormality / determinant tolerance for rotation matrices.
ROT_TOL = 1e-9

IDENTITY = np.eye(3)


class DegenerateInputError(ValueError):
    """A geometric routine received input it cannot orient (near-zero norm)."""


def vec(x: float, y: float, z: float) -> np.ndarray:
    return np.array([x, y, z], dtype=float)


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # np.cross has high dispatch overhead on single vectors; spelled out.
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def norm(v: np.ndarray) -> float:
    return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


def normalize(v: np.ndarray) -> np.ndarray:
    """Unit vector along v. Raises DegenerateInputError below EPS_DEGENERATE."""
    n = norm(v)
    if n < EPS_DEGENERATE:
        raise DegenerateInputError(f"cannot normalize near-zero vector (norm={n:.3e})")
    return v / n


def hat(v: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix such that hat(v) @ u == cross(v, u)."""
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def rodrigues(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rotation matrix for a rotation of `angle` about the unit vector `axis`.

    Equivalent to I + sin(a)*hat(axis) + (1-cos(a))*hat(axis)^2, expanded
    componentwise. The axis must be unit length to within 1e-9.
    """
    x, y, z = float(axis[0]), float(axis[1]), float(axis[2])
    if abs(x * x + y * y + z * z - 1.0) > 2e-9:
        raise DegenerateInputError("rotation axis must be unit length")
    c = math.cos(angle)
    s = math.sin(angle)
    cc = 1.0 - c
    return np.array(
        [
            [x * x * cc + c, x * y * cc - z * s, x * z * cc + y * s],
            [y * x * cc + z * s, y * y * cc + c, y * z * cc - x * s],
            [z * x * cc - y * s, z * y * cc + x * s, z * z * cc + c],
        ]
    )


def rotate(axis: np.ndarray, angle: float, v: np.ndarray) -> np.ndarray:
    """Apply a rotation about a unit axis to v without building the matrix."""
    c = math.cos(angle)
    s = math.sin(angle)
    ax, ay, az = axis[0], axis[1], axis[2]
    vx, vy, vz = v[0], v[1], v[2]
    dot = ax * vx + ay * vy + az * vz
    k = dot * (1.0 - c)
    return np.array(
        [
            vx * c + (ay * vz - az * vy) * s + ax * k,
            vy * c + (az * vx - ax * vz) * s + ay * k,
            vz * c + (ax * vy - ay * vx) * s + az * k,
        ]
    )


def is_rotation(m: np.ndarray, tol: float = ROT_TOL) -> bool:
    if m.shape != (3, 3):
        return False
    err = np.linalg.norm(m.T @ m - IDENTITY)
    return err < tol and abs(np.linalg.det(m) - 1.0) < tol


def wrap_angle(angle: float) -> float:
    """Canonicalize an angle to (-pi, pi]."""
    a = math.fmod(angle, 2.0 * math.pi)
    if a > math.pi:
        a -= 2.0 * math.pi
    elif a <= -math.pi:
        a += 2.0 * math.pi
    return a


def axis_angle(rot: np.ndarray) -> tuple[np.ndarray, float]:
    """Extract (unit axis, angle in [0, pi]) from a rotation matrix.

    At angle pi the axis sign is ambiguous; a deterministic valid axis is
    returned (largest-diagonal column method). At angle 0 the axis defaults
    to +x.
    """
    w = np.array(
        [
            rot[2, 1] - rot[1, 2],
            rot[0, 2] - rot[2, 0],
            rot[1, 0] - rot[0, 1],
        ]
    )
    sin_a = 0.5 * norm(w)
    cos_a = 0.5 * (rot[0, 0] + rot[1, 1] + rot[2, 2] - 1.0)
    angle = math.atan2(sin_a, cos_a)
    if sin_a > 1e-7:
        return w / (2.0 * sin_a), angle
    if cos_a > 0.0:
        # Angle ~ 0: any axis works.
        return np.array([1.0, 0.0, 0.0]), angle
    # Angle ~ pi: recover the axis from the symmetric part, R + I = 2 a a^T.
    diag = np.array([rot[0, 0], rot[1, 1], rot[2, 2]])
    i = int(np.argmax(diag))
    axis = np.array([rot[0, i], rot[1, i], rot[2, i]])
    axis[i] += 1.0
    return normalize(axis), angle


def rot_to_quat(rot: np.ndarray) -> np.ndarray:
    """Rotation matrix -> unit quaternion (x, y, z, w), w >= 0."""
    tr = rot[0, 0] + rot[1, 1] + rot[2, 2]
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        q = np.array(
            [
                (rot[2, 1] - rot[1, 2]) / s,
                (rot[0, 2] - rot[2, 0]) / s,
                (rot[1, 0] - rot[0, 1]) / s,
                0.25 * s,
            ]
        )
    else:
        i = int(np.argmax([rot[0, 0], rot[1, 1], rot[2, 2]]))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = math.sqrt(max(rot[i, i] - rot[j, j] - rot[k, k] + 1.0, 0.0)) * 2.0
        q = np.empty(4)
        q[i] = 0.25 * s
        q[j] = (rot[j, i] + rot[i, j]) / s
        q[k] = (rot[k, i] + rot[i, k]) / s
        q[3] = (rot[k, j] - rot[j, k]) / s
    if q[3] < 0.0:
        q = -q
    return q / np.linalg.norm(q)


def quat_to_rot(q: np.ndarray) -> np.ndarray:
    """Unit quaternion (x, y, z, w) -> rotation matrix."""
    x, y, z, w = (float(c) for c in q)
    n = math.sqrt(x * x + y * y + z * z + w * w)
    if n < EPS_DEGENERATE:
        raise DegenerateInputError("zero-norm quaternion")
    x, y, z, w = x / n, y / n, z / n, w / n
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


@dataclass(frozen=True)
class Frame:
    """A coordinate frame: orientation (columns = frame axes) and origin,
    both expressed in a shared reference frame."""

    orientation: np.ndarray = field(default_factory=lambda: np.eye(3))
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def validate(self) -> None:
        if not is_rotation(self.orientation):
            raise DegenerateInputError("frame orientation is not a rotation matrix")


WORLD_FRAME = Frame()


def transform_point(v: np.ndarray, frame_a: Frame, frame_b: Frame) -> np.ndarray:
    """Re-express a point given in frame_a coordinates in frame_b coordinates.

    Both frames are poses relative to the same reference; the map is
    C_b^T (C_a v + c_a - c_b) and round-trips exactly.
    """
    world = frame_a.orientation @ v + frame_a.origin
    return frame_b.orientation.T @ (world - frame_b.origin)


def make_frame(k_left: np.ndarray, k_right: np.ndarray, k_bottom: np.ndarray) -> Frame:
    """Build a frame from three non-collinear keypoints.

    Origin is the left/right midpoint; y points right->left, x is the
    "front" direction y x (origin - bottom), z completes the right-handed
    set. Raises DegenerateInputError for (near-)collinear keypoints.
    """
    origin = 0.5 * (k_left + k_right)
    u_y = normalize(k_left - k_right)
    front = cross(u_y, origin - k_bottom)
    if norm(front) < EPS_DEGENERATE:
        raise DegenerateInputError("keypoints are collinear; frame is undefined")
    u_x = normalize(front)
    u_z = cross(u_x, u_y)
    return Frame(orientation=np.column_stack([u_x, u_y, u_z]), origin=origin)


# --- Intrinsic Euler decomposition -----------------------------------------

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}
_UNIT = {0: np.array([1.0, 0.0, 0.0]), 1: np.array([0.0, 1.0, 0.0]), 2: np.array([0.0, 0.0, 1.0])}


class GimbalLockError(ValueError):
    """Euler decomposition hit (or is too close to) its singular middle angle."""


def euler_compose(order: str, angles: tuple[float, float, float]) -> np.ndarray:
    """Compose intrinsic rotations about the axes named in `order` (e.g. "zyx")."""
    r = IDENTITY
    for letter, ang in zip(order.lower(), angles):
        r = r @ rodrigues(_UNIT[_AXIS_INDEX[letter]], ang)
    return r


def euler_decompose(rot: np.ndarray, order: str, gimbal_tol: float = 1e-6) -> tuple[float, float, float]:
    """Intrinsic Euler angles (a, b, c) with rot = R(axis1,a) R(axis2,b) R(axis3,c).

    Supports all 12 orders: Tait-Bryan (three distinct axes, e.g. "zyx") and
    proper Euler (repeated outer axis, e.g. "xyx"). Raises GimbalLockError
    when the middle angle is within `gimbal_tol` of the singularity
    (cos b ~ 0 for distinct axes, sin b ~ 0 for repeated axes).
    """
    order = order.lower()
    if len(order) != 3 or any(c not in _AXIS_INDEX for c in order):
        raise ValueError(f"bad euler order {order!r}")
    i, j, k = (_AXIS_INDEX[c] for c in order)
    if i == j or j == k:
        raise ValueError(f"consecutive repeated axis in order {order!r}")
    cyclic = (j - i) % 3 == 1

    if i != k:
        # Tait-Bryan: singular when |sin b| = 1.
        s_b = rot[i, k] if cyclic else -rot[i, k]
        if 1.0 - abs(s_b) < gimbal_tol:
            raise GimbalLockError(f"order {order}: middle angle within tolerance of +/-90 deg")
        b = math.asin(max(-1.0, min(1.0, s_b)))
        if cyclic:
            a = math.atan2(-rot[j, k], rot[k, k])
            c = math.atan2(-rot[i, j], rot[i, i])
        else:
            a = math.atan2(rot[j, k], rot[k, k])
            c = math.atan2(rot[i, j], rot[i, i])
        return a, b, c

    # Proper Euler: repeated outer axis, singular when sin b = 0.
    third = 3 - i - j
    c_b = rot[i, i]
    if 1.0 - abs(c_b) < gimbal_tol:
        raise GimbalLockError(f"order {order}: middle angle within tolerance of 0/180 deg")
    b = math.acos(max(-1.0, min(1.0, c_b)))
    if cyclic:
        a = math.atan2(rot[j, i], -rot[third, i])
        c = math.atan2(rot[i, j], rot[i, third])
    else:
        a = math.atan2(rot[j, i], rot[third, i])
        c = math.atan2(rot[i, j], -rot[i, third])
    return a, b, c
