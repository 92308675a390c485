"""7-DoF serial arm description, forward kinematics, and joint-limit handling.

Arms are loaded from TOML description files (schema in docs/robot_config.md).
All quantities live in the shared body-centric frame: x front, y left, z up,
origin midway between the shoulders. Models are immutable after load and all
queries are thread-safe.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .geometry import Frame, is_rotation, norm, normalize, rodrigues

N_JOINTS = 7

# Default keypoint attachment: shoulder at joint 1, elbow at joint 4, wrist at
# joint 6 (actuator origins of the humanoid morphology).
DEFAULT_KEYPOINT_JOINTS = (1, 4, 6)

PERPENDICULARITY_TOL = 1e-6


class ModelError(ValueError):
    """Robot description file failed to parse or violates a model invariant."""


@dataclass(frozen=True)
class TorsoCapsule:
    p1: np.ndarray
    p2: np.ndarray
    radius: float


@dataclass(frozen=True)
class WristEulerSpec:
    """Cached Euler decomposition data for a perpendicular wrist.

    ``order`` names the 5th-frame coordinate axes the three wrist joint axes
    map to; ``signs`` flips angles for negatively oriented axes; ``fix`` is
    the constant tail rotation R_local(5,6) @ R_local(6,7).
    """

    order: str
    signs: tuple[float, float, float]
    fix: np.ndarray


@dataclass(frozen=True)
class RobotArmModel:
    name: str
    side: str  # "left" | "right"
    wrist_type: str  # "parallel" | "perpendicular"
    axes: np.ndarray  # (7, 3) unit joint axes, local frames
    local_rotations: np.ndarray  # (7, 3, 3)
    local_translations: np.ndarray  # (7, 3) meters
    limits_low: np.ndarray  # (7,) radians
    limits_high: np.ndarray  # (7,)
    r_align: np.ndarray  # (3, 3) end-effector convention fix
    tool_rotation: np.ndarray  # (3, 3) tool mount in the 7th frame
    tool_offset: np.ndarray  # (3,) tool tip in the 7th frame, meters
    base: Frame
    capsule_radii: dict[str, float]  # upper/lower/hand, meters
    torso: TorsoCapsule | None
    keypoint_joints: tuple[int, int, int]  # 1-based (shoulder, elbow, wrist)
    limb_lengths: tuple[float, float, float]  # upper, lower, hand, meters
    wrist_euler: WristEulerSpec | None

    def clamp(self, q: np.ndarray) -> np.ndarray:
        return np.clip(q, self.limits_low, self.limits_high)

    def in_limits(self, joint: int, angle: float, tol: float = 1e-12) -> bool:
        i = joint - 1
        return self.limits_low[i] - tol <= angle <= self.limits_high[i] + tol

    def widened(self, low: float = -2.0 * math.pi, high: float = 2.0 * math.pi) -> "RobotArmModel":
        """Copy with every joint limit replaced (used by optimality checks)."""
        import dataclasses

        return dataclasses.replace(
            self,
            limits_low=np.full(N_JOINTS, low),
            limits_high=np.full(N_JOINTS, high),
        )


@dataclass(frozen=True)
class ArmKeypoints:
    """Shoulder/elbow/wrist/tool positions and tool orientation of one arm."""

    shoulder: np.ndarray
    elbow: np.ndarray
    wrist: np.ndarray
    tool: np.ndarray
    tool_rot: np.ndarray


@dataclass
class BoundedCandidates:
    candidates: list[tuple[float, ...]]
    clamped: bool


def chain_rotations(model: RobotArmModel, q: np.ndarray) -> list[np.ndarray]:
    """Cumulative rotations [R(0,0), R(0,1), ..., R(0,7)] including the base."""
    rots = [model.base.orientation]
    r = model.base.orientation
    for i in range(N_JOINTS):
        r = r @ model.local_rotations[i] @ rodrigues(model.axes[i], q[i])
        rots.append(r)
    return rots


def rotation_to_frame(model: RobotArmModel, q: np.ndarray, i: int) -> np.ndarray:
    """Rotation from the body frame to the i-th joint frame, 0 <= i <= 7."""
    if not 0 <= i <= N_JOINTS:
        raise IndexError(f"joint frame index {i} out of range 0..7")
    r = model.base.orientation
    for j in range(i):
        r = r @ model.local_rotations[j] @ rodrigues(model.axes[j], q[j])
    return r


def fk(model: RobotArmModel, q: np.ndarray) -> ArmKeypoints:
    """Keypoints and tool orientation at pose q, in the body frame."""
    rots = chain_rotations(model, q)
    origins = [model.base.origin]
    p = model.base.origin
    for i in range(N_JOINTS):
        p = p + rots[i] @ model.local_translations[i]
        origins.append(p)
    s_j, e_j, w_j = model.keypoint_joints
    tool = origins[7] + rots[7] @ model.tool_offset
    tool_rot = rots[7] @ model.tool_rotation @ model.r_align
    return ArmKeypoints(
        shoulder=origins[s_j],
        elbow=origins[e_j],
        wrist=origins[w_j],
        tool=tool,
        tool_rot=tool_rot,
    )


def tool_orientation(model: RobotArmModel, q: np.ndarray) -> np.ndarray:
    return rotation_to_frame(model, q, 7) @ model.tool_rotation @ model.r_align


def bound_joints(
    model: RobotArmModel,
    candidates: list[tuple[float, ...]],
    joints: tuple[int, ...],
) -> BoundedCandidates:
    """Apply joint limits to candidate angle tuples.

    Multiple candidates: drop the ones violating limits; if every candidate
    violates, clamp the least-violating one and flag it. A single candidate is
    clamped directly (flagged only if it actually moved).
    """
    if not candidates:
        raise ValueError("bound_joints requires at least one candidate")

    def clamp_tuple(cand: tuple[float, ...]) -> tuple[tuple[float, ...], bool]:
        out = []
        moved = False
        for joint, angle in zip(joints, cand):
            i = joint - 1
            c = min(max(angle, model.limits_low[i]), model.limits_high[i])
            moved = moved or c != angle
            out.append(c)
        return tuple(out), moved

    if len(candidates) == 1:
        clamped_cand, moved = clamp_tuple(candidates[0])
        return BoundedCandidates(candidates=[clamped_cand], clamped=moved)

    survivors = [
        cand
        for cand in candidates
        if all(model.in_limits(j, a) for j, a in zip(joints, cand))
    ]
    if survivors:
        return BoundedCandidates(candidates=survivors, clamped=False)

    def violation(cand: tuple[float, ...]) -> float:
        total = 0.0
        for joint, angle in zip(joints, cand):
            i = joint - 1
            total += max(0.0, model.limits_low[i] - angle) + max(
                0.0, angle - model.limits_high[i]
            )
        return total

    best = min(candidates, key=violation)
    clamped_cand, _ = clamp_tuple(best)
    return BoundedCandidates(candidates=[clamped_cand], clamped=True)


# --- description file loading ------------------------------------------------

_AXIS_LETTERS = {0: "x", 1: "y", 2: "z"}


def _parse_vec3(raw, where: str) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != 3:
        raise ModelError(f"{where}: expected a list of 3 numbers")
    return np.array([float(v) for v in raw])


def _parse_rotation(table: dict, key: str, where: str, required: bool) -> np.ndarray | None:
    flat = table.get(key)
    aa = table.get(f"{key}_axis_angle")
    if flat is None and aa is None:
        if required:
            raise ModelError(f"{where}: missing required rotation '{key}'")
        return None
    if flat is not None and aa is not None:
        raise ModelError(f"{where}: give '{key}' or '{key}_axis_angle', not both")
    if flat is not None:
        if not isinstance(flat, list) or len(flat) != 9:
            raise ModelError(f"{where}: '{key}' must be 9 row-major numbers")
        rot = np.array([float(v) for v in flat]).reshape(3, 3)
    else:
        if not isinstance(aa, list) or len(aa) != 4:
            raise ModelError(f"{where}: '{key}_axis_angle' must be [x, y, z, angle]")
        axis = normalize(np.array([float(v) for v in aa[:3]]))
        rot = rodrigues(axis, float(aa[3]))
    if not is_rotation(rot, tol=1e-6):
        raise ModelError(f"{where}: '{key}' is not a rotation matrix")
    return rot


def _euler_spec(model_axes: np.ndarray, local_rotations: np.ndarray, name: str) -> WristEulerSpec:
    u5 = model_axes[4]
    u6 = local_rotations[5] @ model_axes[5]
    u7 = local_rotations[5] @ local_rotations[6] @ model_axes[6]
    letters: list[str] = []
    signs: list[float] = []
    for joint, u in zip((5, 6, 7), (u5, u6, u7)):
        idx = int(np.argmax(np.abs(u)))
        sign = math.copysign(1.0, u[idx])
        residual = norm(u - sign * np.eye(3)[idx])
        if residual > PERPENDICULARITY_TOL:
            raise ModelError(
                f"{name}: perpendicular wrist requires joint {joint}'s axis to map to a "
                f"5th-frame coordinate axis (got {np.round(u, 6).tolist()})"
            )
        letters.append(_AXIS_LETTERS[idx])
        signs.append(sign)
    if letters[0] == letters[1] or letters[1] == letters[2]:
        raise ModelError(f"{name}: wrist joint axes do not form a valid rotation order")
    return WristEulerSpec(
        order="".join(letters),
        signs=(signs[0], signs[1], signs[2]),
        fix=local_rotations[5] @ local_rotations[6],
    )


def load_model(path: str | Path) -> RobotArmModel:
    """Load and validate an arm description file."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ModelError(f"{path}: cannot read file: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ModelError(f"{path}: parse error: {exc}") from exc

    where = str(path)
    version = data.get("format_version")
    if version != 1:
        raise ModelError(f"{where}: unsupported or missing format_version (expected 1)")

    name = data.get("name", path.stem)
    side = data.get("side")
    if side not in ("left", "right"):
        raise ModelError(f"{where}: 'side' must be 'left' or 'right'")
    wrist_type = data.get("wrist_type")
    if wrist_type not in ("parallel", "perpendicular"):
        raise ModelError(f"{where}: 'wrist_type' must be 'parallel' or 'perpendicular'")

    joints = data.get("joints")
    if not isinstance(joints, list) or len(joints) != N_JOINTS:
        raise ModelError(f"{where}: expected exactly {N_JOINTS} [[joints]] entries")

    axes = np.zeros((N_JOINTS, 3))
    local_rotations = np.zeros((N_JOINTS, 3, 3))
    local_translations = np.zeros((N_JOINTS, 3))
    low = np.zeros(N_JOINTS)
    high = np.zeros(N_JOINTS)
    for i, joint in enumerate(joints):
        tag = f"{where}: joints[{i + 1}]"
        axis = _parse_vec3(joint.get("axis"), f"{tag}.axis") if "axis" in joint else None
        if axis is None:
            raise ModelError(f"{tag}: missing 'axis'")
        n = norm(axis)
        if abs(n - 1.0) > 1e-6:
            raise ModelError(f"{tag}: axis must be unit length (norm {n:.6f})")
        axes[i] = axis / n
        rot = _parse_rotation(joint, "rotation", tag, required=False)
        local_rotations[i] = rot if rot is not None else np.eye(3)
        local_translations[i] = (
            _parse_vec3(joint["translation"], f"{tag}.translation")
            if "translation" in joint
            else np.zeros(3)
        )
        limits = joint.get("limits")
        if not isinstance(limits, list) or len(limits) != 2:
            raise ModelError(f"{tag}: missing 'limits' [low, high]")
        low[i], high[i] = float(limits[0]), float(limits[1])
        if not low[i] < high[i]:
            raise ModelError(f"{tag}: limits must satisfy low < high")

    r_align = _parse_rotation(data, "r_align", where, required=True)
    tool_rotation = _parse_rotation(data, "tool_rotation", where, required=False)
    if tool_rotation is None:
        tool_rotation = np.eye(3)
    tool_offset = (
        _parse_vec3(data["tool_offset"], f"{where}.tool_offset")
        if "tool_offset" in data
        else np.zeros(3)
    )

    base_rot = _parse_rotation(data, "base_orientation", where, required=False)
    base = Frame(
        orientation=base_rot if base_rot is not None else np.eye(3),
        origin=_parse_vec3(data["base_origin"], f"{where}.base_origin")
        if "base_origin" in data
        else np.zeros(3),
    )

    caps = data.get("capsules")
    if not isinstance(caps, dict) or any(k not in caps for k in ("upper", "lower", "hand")):
        raise ModelError(f"{where}: [capsules] must define upper, lower, and hand radii")
    radii = {k: float(caps[k]) for k in ("upper", "lower", "hand")}
    if any(r <= 0 for r in radii.values()):
        raise ModelError(f"{where}: capsule radii must be positive")

    torso = None
    if "torso" in data:
        t = data["torso"]
        torso = TorsoCapsule(
            p1=_parse_vec3(t.get("p1"), f"{where}.torso.p1"),
            p2=_parse_vec3(t.get("p2"), f"{where}.torso.p2"),
            radius=float(t.get("radius", 0.0)),
        )
        if torso.radius <= 0:
            raise ModelError(f"{where}: torso radius must be positive")

    kp = data.get("keypoints", {})
    keypoint_joints = (
        int(kp.get("shoulder_joint", DEFAULT_KEYPOINT_JOINTS[0])),
        int(kp.get("elbow_joint", DEFAULT_KEYPOINT_JOINTS[1])),
        int(kp.get("wrist_joint", DEFAULT_KEYPOINT_JOINTS[2])),
    )
    if any(not 1 <= j <= 7 for j in keypoint_joints):
        raise ModelError(f"{where}: keypoint joint indices must be in 1..7")

    # Consecutive joint axes must be perpendicular at the zero pose.
    for i in range(N_JOINTS - 1):
        mapped = local_rotations[i + 1] @ axes[i + 1]
        if abs(float(axes[i] @ mapped)) > PERPENDICULARITY_TOL:
            raise ModelError(
                f"{where}: joints {i + 1} and {i + 2} have non-perpendicular axes"
            )

    if wrist_type == "parallel" and norm(axes[6] - np.array([1.0, 0.0, 0.0])) > 1e-9:
        raise ModelError(
            f"{where}: parallel wrist requires joint 7's axis to be [1, 0, 0] "
            "(the tool pointing axis of its local frame)"
        )

    wrist_euler = (
        _euler_spec(axes, local_rotations, where) if wrist_type == "perpendicular" else None
    )

    model = RobotArmModel(
        name=name,
        side=side,
        wrist_type=wrist_type,
        axes=axes,
        local_rotations=local_rotations,
        local_translations=local_translations,
        limits_low=low,
        limits_high=high,
        r_align=r_align,
        tool_rotation=tool_rotation,
        tool_offset=tool_offset,
        base=base,
        capsule_radii=radii,
        torso=torso,
        keypoint_joints=keypoint_joints,
        limb_lengths=(0.0, 0.0, 0.0),
        wrist_euler=wrist_euler,
    )
    zero = fk(model, np.zeros(N_JOINTS))
    lengths = (
        norm(zero.elbow - zero.shoulder),
        norm(zero.wrist - zero.elbow),
        norm(zero.tool - zero.wrist),
    )
    if lengths[0] < 1e-6 or lengths[1] < 1e-6:
        raise ModelError(f"{where}: degenerate limb lengths {lengths}")
    import dataclasses

    return dataclasses.replace(model, limb_lengths=lengths)


@dataclass(frozen=True)
class ArmPair:
    """A bimanual left/right model pair sharing one torso."""

    left: RobotArmModel
    right: RobotArmModel

    def __post_init__(self) -> None:
        if self.left.side != "left" or self.right.side != "right":
            raise ModelError("ArmPair requires a left-side and a right-side model")
        lt, rt = self.left.torso, self.right.torso
        if lt is None or rt is None:
            raise ModelError("both models of a pair must define the torso capsule")
        if (
            norm(lt.p1 - rt.p1) > 1e-9
            or norm(lt.p2 - rt.p2) > 1e-9
            or abs(lt.radius - rt.radius) > 1e-9
        ):
            raise ModelError("left/right models disagree about the torso capsule")

    @property
    def torso(self) -> TorsoCapsule:
        assert self.left.torso is not None
        return self.left.torso


def load_pair(left_path: str | Path, right_path: str | Path) -> ArmPair:
    return ArmPair(left=load_model(left_path), right=load_model(right_path))
