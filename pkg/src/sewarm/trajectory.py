"""Keypoint trajectory files and synthetic motion generation.

Trajectories are line-delimited JSON (one frame per line, schema in
docs/trajectory_format.md): a timestamp, a torso anchor, and per-arm
shoulder/elbow/wrist keypoints plus a hand orientation given as a unit
quaternion (x, y, z, w), a row-major 3x3 matrix, or index/pinky finger roots.
Frames whose limbs or torso triangle are degenerate are flagged at load time
but kept, so replay exercises the solver's fallback paths.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import EPS_DEGENERATE, cross, norm, quat_to_rot
from .retarget import HumanInput


class TrajectoryError(ValueError):
    """Trajectory file violates the documented schema."""


@dataclass(frozen=True)
class TrajectoryFrame:
    t: float
    left: HumanInput
    right: HumanInput
    degenerate: bool = False


@dataclass
class KeypointTrajectory:
    frames: list[TrajectoryFrame]
    source: str = "synthetic"

    def __len__(self) -> int:
        return len(self.frames)


def _vec(raw, where: str) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != 3:
        raise TrajectoryError(f"{where}: expected [x, y, z]")
    return np.array([float(v) for v in raw])


def _hand_rot(arm: dict, where: str) -> np.ndarray | None:
    if "hand_quat" in arm:
        q = arm["hand_quat"]
        if not isinstance(q, list) or len(q) != 4:
            raise TrajectoryError(f"{where}.hand_quat: expected [x, y, z, w]")
        return quat_to_rot(np.array([float(v) for v in q]))
    if "hand_mat" in arm:
        m = arm["hand_mat"]
        if not isinstance(m, list) or len(m) != 9:
            raise TrajectoryError(f"{where}.hand_mat: expected 9 row-major numbers")
        return np.array([float(v) for v in m]).reshape(3, 3)
    return None


def _parse_arm(arm: dict, where: str, torso, s_left, s_right) -> HumanInput:
    if not isinstance(arm, dict):
        raise TrajectoryError(f"{where}: expected an object")
    for key in ("s", "e", "w"):
        if key not in arm:
            raise TrajectoryError(f"{where}: missing keypoint '{key}'")
    hand = _hand_rot(arm, where)
    index_root = _vec(arm["index"], f"{where}.index") if "index" in arm else None
    pinky_root = _vec(arm["pinky"], f"{where}.pinky") if "pinky" in arm else None
    if hand is None and (index_root is None or pinky_root is None):
        raise TrajectoryError(
            f"{where}: needs hand_quat, hand_mat, or both index and pinky keypoints"
        )
    return HumanInput(
        shoulder=_vec(arm["s"], f"{where}.s"),
        elbow=_vec(arm["e"], f"{where}.e"),
        wrist=_vec(arm["w"], f"{where}.w"),
        hand_rot=hand,
        index_root=index_root,
        pinky_root=pinky_root,
        torso_anchor=torso,
        shoulder_left=s_left,
        shoulder_right=s_right,
    )


def _frame_degenerate(frame: TrajectoryFrame) -> bool:
    for arm in (frame.left, frame.right):
        if norm(arm.elbow - arm.shoulder) < EPS_DEGENERATE:
            return True
        if norm(arm.wrist - arm.elbow) < EPS_DEGENERATE:
            return True
        if arm.torso_anchor is not None and arm.shoulder_left is not None:
            span = cross(
                arm.shoulder_left - arm.shoulder_right,
                0.5 * (arm.shoulder_left + arm.shoulder_right) - arm.torso_anchor,
            )
            if norm(span) < EPS_DEGENERATE:
                return True
    return False


def load_trajectory(path: str | Path) -> KeypointTrajectory:
    """Parse and validate a JSONL keypoint trajectory.

    Schema violations raise TrajectoryError naming the offending line;
    degenerate frames are flagged, not dropped.
    """
    path = Path(path)
    frames: list[TrajectoryFrame] = []
    last_t: float | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TrajectoryError(f"{where}: invalid JSON: {exc}") from exc
            if "t" not in record:
                raise TrajectoryError(f"{where}: missing timestamp 't'")
            t = float(record["t"])
            if last_t is not None and t <= last_t:
                raise TrajectoryError(
                    f"{where}: timestamps must be strictly increasing "
                    f"({t} after {last_t})"
                )
            last_t = t
            if "left" not in record or "right" not in record:
                raise TrajectoryError(f"{where}: missing 'left' or 'right' arm record")
            torso = _vec(record["torso"], f"{where}.torso") if "torso" in record else None
            s_left = (
                _vec(record["shoulder_left"], f"{where}.shoulder_left")
                if "shoulder_left" in record
                else _vec(record["left"]["s"], f"{where}.left.s")
            )
            s_right = (
                _vec(record["shoulder_right"], f"{where}.shoulder_right")
                if "shoulder_right" in record
                else _vec(record["right"]["s"], f"{where}.right.s")
            )
            if torso is None:
                raise TrajectoryError(f"{where}: missing 'torso' anchor keypoint")
            left = _parse_arm(record["left"], f"{where}.left", torso, s_left, s_right)
            right = _parse_arm(record["right"], f"{where}.right", torso, s_left, s_right)
            frame = TrajectoryFrame(t=t, left=left, right=right)
            frames.append(
                TrajectoryFrame(t=t, left=left, right=right, degenerate=_frame_degenerate(frame))
            )
    return KeypointTrajectory(frames=frames, source=str(path))


def write_trajectory(traj: KeypointTrajectory, path: str | Path) -> None:
    """Serialize a trajectory in the JSONL schema (hand as quaternion)."""
    from .geometry import rot_to_quat

    with open(path, "w", encoding="utf-8") as fh:
        for frame in traj.frames:
            record = {
                "t": frame.t,
                "torso": frame.left.torso_anchor.tolist(),
                "shoulder_left": frame.left.shoulder_left.tolist(),
                "shoulder_right": frame.left.shoulder_right.tolist(),
            }
            for name, arm in (("left", frame.left), ("right", frame.right)):
                record[name] = {
                    "s": arm.shoulder.tolist(),
                    "e": arm.elbow.tolist(),
                    "w": arm.wrist.tolist(),
                    "hand_quat": rot_to_quat(arm.hand_rot).tolist(),
                }
            fh.write(json.dumps(record) + "\n")


# --- synthetic rolling punch ---------------------------------------------------


def _two_link_elbow(
    shoulder: np.ndarray,
    wrist: np.ndarray,
    upper_len: float,
    lower_len: float,
    swivel_ref: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Elbow position for a two-link arm reaching from shoulder to wrist.

    The wrist is pulled inside the reachable annulus if necessary; the elbow
    swings toward `swivel_ref` (projected perpendicular to the reach line).
    Returns (elbow, possibly adjusted wrist).
    """
    reach = wrist - shoulder
    dist = norm(reach)
    max_reach = 0.999 * (upper_len + lower_len)
    min_reach = 1.001 * abs(upper_len - lower_len)
    if dist < EPS_DEGENERATE:
        reach = np.array([max_reach, 0.0, 0.0])
        dist = max_reach
    if dist > max_reach:
        reach = reach * (max_reach / dist)
        dist = max_reach
    elif dist < min_reach:
        reach = reach * (min_reach / dist)
        dist = min_reach
    wrist = shoulder + reach
    axis = reach / dist

    cos_a = (upper_len * upper_len + dist * dist - lower_len * lower_len) / (
        2.0 * upper_len * dist
    )
    cos_a = max(-1.0, min(1.0, cos_a))
    sin_a = math.sqrt(max(0.0, 1.0 - cos_a * cos_a))

    lateral = swivel_ref - float(swivel_ref @ axis) * axis
    if norm(lateral) < 1e-9:
        fallback = np.array([1.0, 0.0, 0.0])
        lateral = fallback - float(fallback @ axis) * axis
    lateral = lateral / norm(lateral)
    elbow = shoulder + upper_len * (cos_a * axis + sin_a * lateral)
    return elbow, wrist


def _punch_hand_frame(forward: np.ndarray) -> np.ndarray:
    """Hand frame with x along the punch direction, thumb roughly up."""
    x = forward / norm(forward)
    up = np.array([0.0, 0.0, 1.0])
    y = cross(up, x)
    if norm(y) < 1e-6:
        y = cross(np.array([1.0, 0.0, 0.0]), x)
    y = y / norm(y)
    z = cross(x, y)
    return np.column_stack([x, y, z])


def synth_rolling_punch(
    duration: float = 10.0,
    rate: float = 100.0,
    rotations: float = 10.0,
    circle_radius: float = 0.10,
    center_forward: float = 0.34,
    center_height: float = -0.02,
    lateral_offset: float = 0.0,
    shoulder_width: float = 0.40,
    upper_len: float = 0.30,
    lower_len: float = 0.28,
) -> KeypointTrajectory:
    """Both fists tracing alternating circles in front of the chest.

    Defaults complete 10 rotations in 10 seconds. The two circles overlap the
    body midline, so the forearms and fists repeatedly pass within capsule
    range of each other: retargeting the default trajectory without the
    safety filter self-collides on the bundled bimanual models.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    n_frames = max(1, int(round(duration * rate)))
    s_left = np.array([0.0, shoulder_width / 2.0, 0.0])
    s_right = np.array([0.0, -shoulder_width / 2.0, 0.0])
    torso = np.array([0.0, 0.0, -0.5])
    down = np.array([0.0, 0.0, -1.0])

    frames: list[TrajectoryFrame] = []
    for k in range(n_frames):
        t = k / rate
        phase = 2.0 * math.pi * rotations * (t / duration) if duration > 0 else 0.0
        arms: dict[str, HumanInput] = {}
        for name, shoulder, side in (("left", s_left, 1.0), ("right", s_right, -1.0)):
            arm_phase = phase + (math.pi if name == "left" else 0.0)
            wrist = np.array(
                [
                    center_forward + circle_radius * math.cos(arm_phase),
                    side * lateral_offset,
                    center_height + circle_radius * math.sin(arm_phase),
                ]
            )
            swivel = down + np.array([0.0, side * 0.6, 0.0])
            elbow, wrist = _two_link_elbow(shoulder, wrist, upper_len, lower_len, swivel)
            hand = _punch_hand_frame(wrist - elbow)
            arms[name] = HumanInput(
                shoulder=shoulder,
                elbow=elbow,
                wrist=wrist,
                hand_rot=hand,
                torso_anchor=torso,
                shoulder_left=s_left,
                shoulder_right=s_right,
            )
        frame = TrajectoryFrame(t=t, left=arms["left"], right=arms["right"])
        frames.append(
            TrajectoryFrame(
                t=t, left=arms["left"], right=arms["right"], degenerate=_frame_degenerate(frame)
            )
        )
    return KeypointTrajectory(frames=frames, source="synthetic:rolling_punch")
