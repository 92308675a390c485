"""Closed-form arm retargeting: map shoulder/elbow/wrist keypoints and a hand
orientation to 7 joint angles by aligning limb directions and the tool frame.

The solve runs down the arm: joints 1-2 point the upper-arm axis along
shoulder->elbow, joints 3-4 point the lower-arm axis along elbow->wrist, and
joints 5-7 match the hand orientation (two-angle axis alignment plus a roll
for parallel wrists, an intrinsic Euler decomposition for perpendicular
ones). Every stage solves a geometric subproblem exactly, so a reachable
input reproduces its pose to floating-point precision.

Streaming callers chain each result's q as the next call's initial pose; the
nearest-solution selection then keeps branches continuous.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .geometry import (
    DegenerateInputError,
    EPS_DEGENERATE,
    Frame,
    GimbalLockError,
    WORLD_FRAME,
    axis_angle,
    euler_decompose,
    make_frame,
    norm,
    rodrigues,
    transform_point,
)
from .robot import RobotArmModel, bound_joints, fk, rotation_to_frame, tool_orientation
from .subproblems import sp1, sp2

TWO_PI = 2.0 * math.pi

# Gimbal guard, expressed on 1-|sin b| (Tait-Bryan) / 1-|cos b| (repeated
# axis); equivalent to |cos q6| (resp. |sin q6|) < 1e-6.
GIMBAL_TOL = 5e-13

# Columns of the finger-keypoint frame, reordered to the hand convention
# (pointing / palm normal / thumb).
_FINGER_FRAME_PERMUTATION = np.array(
    [
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0],
    ]
)


@dataclass(frozen=True)
class HumanInput:
    """One arm's keypoints plus the body context needed for frame syncing.

    Positions are meters. Before retargeting, everything must be expressed in
    the body-centric frame (x front, y left, z up, origin between the
    shoulders); ``sync_frames`` performs that mapping for raw streams.
    ``hand_rot`` columns follow the pointing / palm-normal / thumb convention;
    when absent it can be built from the finger root keypoints.
    """

    shoulder: np.ndarray
    elbow: np.ndarray
    wrist: np.ndarray
    hand_rot: np.ndarray | None = None
    index_root: np.ndarray | None = None
    pinky_root: np.ndarray | None = None
    torso_anchor: np.ndarray | None = None
    shoulder_left: np.ndarray | None = None
    shoulder_right: np.ndarray | None = None


@dataclass(frozen=True)
class RetargetResult:
    """Joint solution with the per-term costs of the alignment objective.

    Costs are the squared orientation errors (each in [0, 1]); flags record
    which stages clamped at joint limits, held due to degenerate input, or
    hit the wrist gimbal singularity.
    """

    q: np.ndarray
    cost_upper: float
    cost_lower: float
    cost_wrist: float
    clamped: tuple[str, ...] = ()
    degenerate: tuple[str, ...] = ()
    gimbal: bool = False
    solve_time: float = 0.0

    @property
    def total_cost(self) -> float:
        return self.cost_upper + self.cost_lower + self.cost_wrist

    @property
    def clean(self) -> bool:
        return not self.clamped and not self.degenerate and not self.gimbal


def metric_c(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine-similarity orientation error between two directions, in [0, 1]."""
    nu, nv = norm(u), norm(v)
    if nu < EPS_DEGENERATE or nv < EPS_DEGENERATE:
        raise DegenerateInputError("metric_c: zero-length direction")
    c = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]) / (nu * nv)
    return 0.5 - 0.5 * max(-1.0, min(1.0, c))


def metric_m(r1: np.ndarray, r2: np.ndarray) -> float:
    """Chordal rotation error with half-angle scaling, in [0, 1].

    Computed as 0.5 * ||sqrt(R1^T R2) - I||_F where the principal square root
    of a rotation by phi is the rotation by phi/2 about the same axis; equals
    sqrt(2) * sin(phi / 4).
    """
    rel = r1.T @ r2
    axis, angle = axis_angle(rel)
    half = rodrigues(axis, 0.5 * angle)
    half[0, 0] -= 1.0
    half[1, 1] -= 1.0
    half[2, 2] -= 1.0
    return 0.5 * math.sqrt(float(np.sum(half * half)))


# --- frame syncing -----------------------------------------------------------


def body_frame_of(observation: HumanInput) -> Frame:
    """Body-centric frame implied by the shoulder and torso-anchor keypoints."""
    if (
        observation.shoulder_left is None
        or observation.shoulder_right is None
        or observation.torso_anchor is None
    ):
        raise DegenerateInputError(
            "frame syncing needs both shoulder keypoints and a torso anchor"
        )
    return make_frame(
        observation.shoulder_left, observation.shoulder_right, observation.torso_anchor
    )


def sync_frames(
    observation: HumanInput, stream_rotation: np.ndarray | None = None
) -> HumanInput:
    """Map a raw-stream observation into the body-centric frame.

    The frame is built from the two shoulder keypoints and the torso anchor,
    so rigid motion of the torso within the stream cancels out. An optional
    ``stream_rotation`` pre-rotates raw hand orientations whose convention
    differs from pointing/palm/thumb. When ``hand_rot`` is missing but finger
    roots are present, the hand frame is built from index/pinky/wrist.
    """
    frame = body_frame_of(observation)

    def to_body(p: np.ndarray | None) -> np.ndarray | None:
        if p is None:
            return None
        return transform_point(p, WORLD_FRAME, frame)

    hand_rot = observation.hand_rot
    if hand_rot is not None:
        if stream_rotation is not None:
            hand_rot = stream_rotation @ hand_rot
        hand_rot = frame.orientation.T @ hand_rot

    index_b = to_body(observation.index_root)
    pinky_b = to_body(observation.pinky_root)
    wrist_b = to_body(observation.wrist)
    if hand_rot is None and index_b is not None and pinky_b is not None:
        hand_rot = (
            make_frame(index_b, pinky_b, wrist_b).orientation @ _FINGER_FRAME_PERMUTATION
        )

    return replace(
        observation,
        shoulder=to_body(observation.shoulder),
        elbow=to_body(observation.elbow),
        wrist=wrist_b,
        hand_rot=hand_rot,
        index_root=index_b,
        pinky_root=pinky_b,
        torso_anchor=to_body(observation.torso_anchor),
        shoulder_left=to_body(observation.shoulder_left),
        shoulder_right=to_body(observation.shoulder_right),
    )


# --- alignment stages ---------------------------------------------------------


@dataclass
class AxisAlignment:
    angles: tuple[float, float]
    clamped: bool
    degenerate: bool


def _nearest_representative(
    angle: float, reference: float, low: float, high: float
) -> float:
    """Representative of angle (mod 2pi) nearest to `reference`, preferring
    in-limit representatives."""
    reps = (angle, angle + TWO_PI, angle - TWO_PI)
    valid = [r for r in reps if low - 1e-12 <= r <= high + 1e-12]
    pool = valid if valid else list(reps)
    return min(pool, key=lambda r: abs(r - reference))


def align_axis(
    model: RobotArmModel, i: int, q0: np.ndarray, v: np.ndarray
) -> AxisAlignment:
    """Solve joints i-2 and i-1 so the i-th joint axis points along v.

    The target and the relevant axes are expressed in the (i-2) frame at the
    current pose, where the alignment reduces to a two-axis subproblem whose
    angles are offsets from the current joint values. Candidates outside the
    joint limits are dropped (or the nearest is clamped if none survive), and
    the candidate closest to the current pose wins.
    """
    if i - 2 < 1:
        raise ValueError("align_axis needs i >= 3")
    a1, a2, ai = i - 3, i - 2, i - 1  # 0-based joint indices

    r_0_f = rotation_to_frame(model, q0, i - 2)
    v_f = r_0_f.T @ v
    axis_mid_f = model.local_rotations[a2] @ model.axes[a2]
    axis_i_f = (
        model.local_rotations[a2]
        @ rodrigues(model.axes[a2], q0[a2])
        @ model.local_rotations[ai]
        @ model.axes[ai]
    )

    solutions = sp2(v_f, axis_i_f, -model.axes[a1], axis_mid_f)
    if solutions.degenerate and not solutions.exact:
        # Target parallel to the first rotation axis and out of reach of the
        # second: rotation carries no information, so hold the current pair.
        return AxisAlignment(angles=(q0[a1], q0[a2]), clamped=False, degenerate=True)

    candidates = [
        (
            _nearest_representative(
                q0[a1] + t1, q0[a1], model.limits_low[a1], model.limits_high[a1]
            ),
            _nearest_representative(
                q0[a2] + t2, q0[a2], model.limits_low[a2], model.limits_high[a2]
            ),
        )
        for t1, t2 in solutions.pairs
    ]
    bounded = bound_joints(model, candidates, (i - 2, i - 1))
    best = min(
        bounded.candidates, key=lambda c: abs(q0[a1] - c[0]) + abs(q0[a2] - c[1])
    )
    return AxisAlignment(angles=(best[0], best[1]), clamped=bounded.clamped, degenerate=False)


@dataclass
class WristAlignment:
    angles: tuple[float, float, float]
    clamped: bool
    degenerate: bool
    gimbal: bool = False


def _desired_joint7_frame(model: RobotArmModel, hand_rot: np.ndarray) -> np.ndarray:
    return hand_rot @ model.r_align.T @ model.tool_rotation.T


def align_wrist_parallel(
    model: RobotArmModel, q: np.ndarray, hand_rot: np.ndarray
) -> WristAlignment:
    """Wrist solve for tool mounts parallel to the 7th joint axis.

    Joints 5-6 align the 7th joint axis with the desired pointing direction;
    joint 7 is the remaining roll about it, found by matching where the 6th
    joint axis must land in the 7th frame.
    """
    r07_des = _desired_joint7_frame(model, hand_rot)
    upper = align_axis(model, 7, q, r07_des[:, 0])
    if upper.degenerate:
        return WristAlignment(
            angles=(q[4], q[5], q[6]), clamped=False, degenerate=True
        )
    work = q.copy()
    work[4], work[5] = upper.angles

    axis6_world = rotation_to_frame(model, work, 6) @ model.axes[5]
    axis6_target = r07_des.T @ axis6_world
    axis6_zeroed = model.local_rotations[6].T @ model.axes[5]
    try:
        theta7 = sp1(axis6_zeroed, axis6_target, -model.axes[6])
    except DegenerateInputError:
        return WristAlignment(
            angles=(work[4], work[5], q[6]), clamped=upper.clamped, degenerate=True
        )
    theta7 = _nearest_representative(
        theta7, q[6], model.limits_low[6], model.limits_high[6]
    )
    bounded = bound_joints(model, [(theta7,)], (7,))
    return WristAlignment(
        angles=(work[4], work[5], bounded.candidates[0][0]),
        clamped=upper.clamped or bounded.clamped,
        degenerate=False,
    )


def align_wrist_perpendicular(
    model: RobotArmModel, q: np.ndarray, hand_rot: np.ndarray
) -> WristAlignment:
    """Wrist solve for tool mounts perpendicular to the 7th joint axis.

    The desired 7th-frame orientation, expressed in the 5th frame with joint
    5 zeroed and stripped of the fixed inter-joint rotations, is an intrinsic
    rotation product about the three wrist axes; its Euler decomposition (in
    the axis order cached on the model) yields the angles directly.
    """
    spec = model.wrist_euler
    if spec is None:
        raise ValueError("model has no perpendicular-wrist data")
    r07_des = _desired_joint7_frame(model, hand_rot)
    r_tilde = rotation_to_frame(model, q, 4) @ model.local_rotations[4]
    euler_matrix = r_tilde.T @ r07_des @ spec.fix.T
    try:
        raw = euler_decompose(euler_matrix, spec.order, gimbal_tol=GIMBAL_TOL)
    except GimbalLockError:
        return WristAlignment(
            angles=(q[4], q[5], q[6]), clamped=False, degenerate=False, gimbal=True
        )
    clamped = False
    angles = []
    for offset, (sign, angle) in enumerate(zip(spec.signs, raw)):
        joint = 5 + offset
        a = _nearest_representative(
            sign * angle,
            q[joint - 1],
            model.limits_low[joint - 1],
            model.limits_high[joint - 1],
        )
        bounded = bound_joints(model, [(a,)], (joint,))
        clamped = clamped or bounded.clamped
        angles.append(bounded.candidates[0][0])
    return WristAlignment(
        angles=(angles[0], angles[1], angles[2]), clamped=clamped, degenerate=False
    )


def align_wrist(
    model: RobotArmModel, q: np.ndarray, hand_rot: np.ndarray
) -> WristAlignment:
    if model.wrist_type == "parallel":
        return align_wrist_parallel(model, q, hand_rot)
    return align_wrist_perpendicular(model, q, hand_rot)


# --- full pipeline -------------------------------------------------------------


def sew_mimic(
    model: RobotArmModel, q0: np.ndarray, observation: HumanInput
) -> RetargetResult:
    """Retarget one body-centric observation to joint angles, starting from q0.

    Degenerate limbs (elbow on shoulder, wrist on elbow) and wrist
    singularities hold the affected joints at their q0 values and are flagged
    rather than raised, so a streaming caller survives bad frames.
    """
    t0 = time.perf_counter()
    q = model.clamp(np.asarray(q0, dtype=float))
    clamped: list[str] = []
    degenerate: list[str] = []
    gimbal = False

    upper_dir = observation.elbow - observation.shoulder
    lower_dir = observation.wrist - observation.elbow

    if norm(upper_dir) < EPS_DEGENERATE:
        degenerate.append("upper")
    else:
        res = align_axis(model, 3, q, upper_dir / norm(upper_dir))
        q[0], q[1] = res.angles
        if res.clamped:
            clamped.append("upper")
        if res.degenerate:
            degenerate.append("upper")

    if norm(lower_dir) < EPS_DEGENERATE:
        degenerate.append("lower")
    else:
        res = align_axis(model, 5, q, lower_dir / norm(lower_dir))
        q[2], q[3] = res.angles
        if res.clamped:
            clamped.append("lower")
        if res.degenerate:
            degenerate.append("lower")

    if observation.hand_rot is None:
        degenerate.append("wrist")
    else:
        wrist = align_wrist(model, q, observation.hand_rot)
        q[4], q[5], q[6] = wrist.angles
        if wrist.clamped:
            clamped.append("wrist")
        if wrist.degenerate:
            degenerate.append("wrist")
        gimbal = wrist.gimbal

    cost_upper = cost_lower = cost_wrist = 0.0
    if "upper" not in degenerate:
        axis3 = rotation_to_frame(model, q, 3) @ model.axes[2]
        cost_upper = metric_c(upper_dir, axis3) ** 2
    if "lower" not in degenerate:
        axis5 = rotation_to_frame(model, q, 5) @ model.axes[4]
        cost_lower = metric_c(lower_dir, axis5) ** 2
    if observation.hand_rot is not None:
        cost_wrist = metric_m(tool_orientation(model, q), observation.hand_rot) ** 2

    return RetargetResult(
        q=q,
        cost_upper=cost_upper,
        cost_lower=cost_lower,
        cost_wrist=cost_wrist,
        clamped=tuple(clamped),
        degenerate=tuple(degenerate),
        gimbal=gimbal,
        solve_time=time.perf_counter() - t0,
    )


def cost_terms(
    model: RobotArmModel, q: np.ndarray, observation: HumanInput
) -> tuple[float, float, float]:
    """The three alignment objective terms of an arbitrary pose.

    Degenerate limbs and a missing hand orientation contribute zero (no
    information to align against)."""
    upper_dir = observation.elbow - observation.shoulder
    lower_dir = observation.wrist - observation.elbow
    # One pass down the chain serves all three terms (this sits inside the
    # numerical oracle's inner loop).
    rot = model.base.orientation
    axis3 = axis5 = None
    for i in range(7):
        rot = rot @ model.local_rotations[i] @ rodrigues(model.axes[i], q[i])
        if i == 2:
            axis3 = rot @ model.axes[2]
        elif i == 4:
            axis5 = rot @ model.axes[4]
    upper = lower = wrist = 0.0
    if norm(upper_dir) >= EPS_DEGENERATE:
        upper = metric_c(upper_dir, axis3) ** 2
    if norm(lower_dir) >= EPS_DEGENERATE:
        lower = metric_c(lower_dir, axis5) ** 2
    if observation.hand_rot is not None:
        tool = rot @ model.tool_rotation @ model.r_align
        wrist = metric_m(tool, observation.hand_rot) ** 2
    return upper, lower, wrist


def total_cost(model: RobotArmModel, q: np.ndarray, observation: HumanInput) -> float:
    """Alignment objective value of an arbitrary pose (used by the oracle)."""
    return sum(cost_terms(model, q, observation))


def observation_from_fk(model: RobotArmModel, q: np.ndarray) -> HumanInput:
    """Body-frame observation reproducing the robot's own pose (test helper)."""
    kp = fk(model, q)
    return HumanInput(
        shoulder=kp.shoulder, elbow=kp.elbow, wrist=kp.wrist, hand_rot=kp.tool_rot
    )
