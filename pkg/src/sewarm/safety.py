"""Bimanual self-collision safety filter.

The arms and torso are wrapped in capsules anchored at the forward-kinematics
keypoints. Given a current and a desired bimanual pose, the filter finds the
first colliding configuration along the interpolated keypoint path, nudges
the keypoints out of collision with compliance-regularized position updates
(one Lagrange multiplier per capsule pair, link lengths re-projected after
every pass), and maps the adjusted keypoints back to joint angles with the
closed-form retargeting solve. If no collision-free arrangement is found
within the iteration budget the current pose is held.

Keypoints are shared between adjacent capsules (the elbow is both the upper
arm's far end and the lower arm's near end), so chain continuity is
structural. Calls are independent; per-pair multipliers live only within one
call.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .geometry import DegenerateInputError, EPS_DEGENERATE, cross, norm, normalize, rodrigues
from .retarget import HumanInput, RetargetResult, sew_mimic
from .robot import ArmKeypoints, ArmPair, RobotArmModel, fk

# Capsule tags -> (near point, far point). Point names double as weight roles.
CAPSULE_POINTS: dict[str, tuple[str, str]] = {
    "torso": ("torso_top", "torso_bottom"),
    "upper_lt": ("shoulder_lt", "elbow_lt"),
    "upper_rt": ("shoulder_rt", "elbow_rt"),
    "lower_lt": ("elbow_lt", "wrist_lt"),
    "lower_rt": ("elbow_rt", "wrist_rt"),
    "hand_lt": ("wrist_lt", "tool_lt"),
    "hand_rt": ("wrist_rt", "tool_rt"),
}

# Every capsule pair except adjacent ones sharing an endpoint region:
# torso/upper (same shoulder), upper/lower (elbow), lower/hand (wrist).
COLLISION_PAIRS: tuple[tuple[str, str], ...] = (
    ("torso", "lower_lt"),
    ("torso", "lower_rt"),
    ("torso", "hand_lt"),
    ("torso", "hand_rt"),
    ("upper_lt", "upper_rt"),
    ("upper_lt", "lower_rt"),
    ("upper_lt", "hand_lt"),
    ("upper_lt", "hand_rt"),
    ("upper_rt", "lower_lt"),
    ("upper_rt", "hand_lt"),
    ("upper_rt", "hand_rt"),
    ("lower_lt", "lower_rt"),
    ("lower_lt", "hand_rt"),
    ("lower_rt", "hand_lt"),
    ("hand_lt", "hand_rt"),
)

_POINT_ROLE = {
    "torso_top": "torso",
    "torso_bottom": "torso",
    "shoulder_lt": "shoulder",
    "shoulder_rt": "shoulder",
    "elbow_lt": "elbow",
    "elbow_rt": "elbow",
    "wrist_lt": "wrist",
    "wrist_rt": "wrist",
    "tool_lt": "tool",
    "tool_rt": "tool",
}


@dataclass(frozen=True)
class Capsule:
    """Sphere swept along the segment p1..p2."""

    p1: np.ndarray
    p2: np.ndarray
    radius: float
    tag: str


@dataclass(frozen=True)
class ContactResult:
    """Signed distance and scaled push directions for one capsule pair.

    ``distance`` is negative iff the capsules intersect. The normals point
    away from the other capsule and are scaled by the segment parameter of
    the closest point (0 at p1, 1 at p2), which is the far-endpoint's share
    of the contact."""

    distance: float
    normal_i: np.ndarray
    normal_j: np.ndarray
    tau_i: float
    tau_j: float
    point_i: np.ndarray
    point_j: np.ndarray
    # Unit separation direction for capsule i (j uses its negation).
    direction_i: np.ndarray = field(default_factory=lambda: np.zeros(3))


@dataclass
class FilterParams:
    """Tuning of the safety filter.

    Distances are meters: ``d_min`` is the enforced margin, a pair engages
    below ``d_act`` and releases above ``d_rel``. ``compliance`` softens the
    constraint, ``weights`` scale how much each keypoint role may move
    (anchored roles get 0), ``n_iter`` bounds the adjustment loop, and
    ``length_eps`` guards degenerate links in the length projection.
    """

    d_min: float = 0.01
    d_act: float = 0.02
    d_rel: float = 0.05
    compliance: float = 1e-4
    n_iter: int = 20
    weights: dict[str, float] = field(
        default_factory=lambda: {
            "torso": 0.0,
            "shoulder": 0.0,
            "elbow": 1.0,
            "wrist": 1.0,
            "tool": 1.0,
        }
    )
    length_eps: float = 1e-9
    # Convergence slack on the exit test: the compliant update approaches
    # d_min from below and never reaches it exactly.
    exit_slack: float = 1e-4

    def __post_init__(self) -> None:
        if not 0.0 <= self.d_min <= self.d_act <= self.d_rel:
            raise ValueError("require 0 <= d_min <= d_act <= d_rel")
        if self.compliance < 0.0:
            raise ValueError("compliance must be nonnegative")
        if self.n_iter < 1:
            raise ValueError("n_iter must be at least 1")

    def to_dict(self) -> dict:
        return {
            "d_min": self.d_min,
            "d_act": self.d_act,
            "d_rel": self.d_rel,
            "compliance": self.compliance,
            "n_iter": self.n_iter,
            "weights": dict(self.weights),
        }


class CapsuleSet:
    """The seven collision capsules, backed by shared keypoints."""

    def __init__(
        self,
        points: dict[str, np.ndarray],
        radii: dict[str, float],
        ref_lengths: dict[str, float],
    ) -> None:
        self.points = points
        self.radii = radii
        self.ref_lengths = ref_lengths

    def capsule(self, tag: str) -> Capsule:
        a, b = CAPSULE_POINTS[tag]
        return Capsule(p1=self.points[a], p2=self.points[b], radius=self.radii[tag], tag=tag)

    def capsules(self) -> list[Capsule]:
        return [self.capsule(tag) for tag in CAPSULE_POINTS]

    def pair_distances(self) -> list[tuple[str, str, float]]:
        dists = _batched_pair_distances(self.points, self.radii)
        return [(a, b, d) for (a, b), d in zip(COLLISION_PAIRS, dists)]

    def min_distance(self) -> float:
        return float(np.min(_batched_pair_distances(self.points, self.radii)))

    def copy(self) -> "CapsuleSet":
        return CapsuleSet(
            points={k: v.copy() for k, v in self.points.items()},
            radii=dict(self.radii),
            ref_lengths=dict(self.ref_lengths),
        )

    def arm_keypoints(self, side: str) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        sfx = "lt" if side == "left" else "rt"
        return (
            self.points[f"shoulder_{sfx}"],
            self.points[f"elbow_{sfx}"],
            self.points[f"wrist_{sfx}"],
            self.points[f"tool_{sfx}"],
        )


def make_capsules(pair: ArmPair, left_kp: ArmKeypoints, right_kp: ArmKeypoints) -> CapsuleSet:
    """Capsule set for one bimanual keypoint configuration."""
    torso = pair.torso
    points = {
        "torso_top": torso.p1.copy(),
        "torso_bottom": torso.p2.copy(),
        "shoulder_lt": left_kp.shoulder.copy(),
        "elbow_lt": left_kp.elbow.copy(),
        "wrist_lt": left_kp.wrist.copy(),
        "tool_lt": left_kp.tool.copy(),
        "shoulder_rt": right_kp.shoulder.copy(),
        "elbow_rt": right_kp.elbow.copy(),
        "wrist_rt": right_kp.wrist.copy(),
        "tool_rt": right_kp.tool.copy(),
    }
    radii = {
        "torso": torso.radius,
        "upper_lt": pair.left.capsule_radii["upper"],
        "lower_lt": pair.left.capsule_radii["lower"],
        "hand_lt": pair.left.capsule_radii["hand"],
        "upper_rt": pair.right.capsule_radii["upper"],
        "lower_rt": pair.right.capsule_radii["lower"],
        "hand_rt": pair.right.capsule_radii["hand"],
    }
    ref_lengths = {
        "torso": norm(torso.p2 - torso.p1),
        "upper_lt": pair.left.limb_lengths[0],
        "lower_lt": pair.left.limb_lengths[1],
        "hand_lt": pair.left.limb_lengths[2],
        "upper_rt": pair.right.limb_lengths[0],
        "lower_rt": pair.right.limb_lengths[1],
        "hand_rt": pair.right.limb_lengths[2],
    }
    return CapsuleSet(points=points, radii=radii, ref_lengths=ref_lengths)


def _batched_pair_distances(points: dict[str, np.ndarray], radii: dict[str, float]) -> np.ndarray:
    """Signed distances of every collision pair in one vectorized pass.

    Same clamped segment-closest-point construction as ``_segment_closest``,
    evaluated for all pairs at once; only distances are produced (no closest
    points or parameters), which is all the distance queries need.
    """
    n = len(COLLISION_PAIRS)
    p1 = np.empty((n, 3))
    q1 = np.empty((n, 3))
    p2 = np.empty((n, 3))
    q2 = np.empty((n, 3))
    rads = np.empty(n)
    for row, (tag_i, tag_j) in enumerate(COLLISION_PAIRS):
        a1, a2 = CAPSULE_POINTS[tag_i]
        b1, b2 = CAPSULE_POINTS[tag_j]
        p1[row] = points[a1]
        q1[row] = points[a2]
        p2[row] = points[b1]
        q2[row] = points[b2]
        rads[row] = radii[tag_i] + radii[tag_j]

    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = np.einsum("ij,ij->i", d1, d1)
    e = np.einsum("ij,ij->i", d2, d2)
    f = np.einsum("ij,ij->i", d2, r)
    c = np.einsum("ij,ij->i", d1, r)
    b = np.einsum("ij,ij->i", d1, d2)
    tiny = 1e-18

    denom = a * e - b * b
    safe_denom = np.where(denom > 1e-12 * a * e, denom, 1.0)
    s = np.clip((b * f - c * e) / safe_denom, 0.0, 1.0)
    # Parallel or degenerate first segment: fall back to s = 0 (any point on
    # the overlap yields the same line distance, which is all we report).
    s = np.where(denom > 1e-12 * a * e, s, 0.0)
    # Degenerate second segment: project its point onto the first segment.
    s = np.where(e > tiny, s, np.clip(-c / np.where(a > tiny, a, 1.0), 0.0, 1.0))
    s = np.where(a > tiny, s, 0.0)

    t = np.where(e > tiny, (b * s + f) / np.where(e > tiny, e, 1.0), 0.0)
    t_clamped = np.clip(t, 0.0, 1.0)
    redo = (t != t_clamped) & (a > tiny)
    s = np.where(redo, np.clip((b * t_clamped - c) / np.where(a > tiny, a, 1.0), 0.0, 1.0), s)

    closest1 = p1 + s[:, None] * d1
    closest2 = p2 + t_clamped[:, None] * d2
    gap = closest1 - closest2
    return np.sqrt(np.einsum("ij,ij->i", gap, gap)) - rads


def _segment_closest(
    p1: np.ndarray, q1: np.ndarray, p2: np.ndarray, q2: np.ndarray
) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Closest points between segments p1..q1 and p2..q2 with parameters.

    Degenerate (point-like) segments use the midpoint parameter 0.5; exactly
    parallel overlapping segments resolve to the midpoint of the overlap
    interval, deterministically.
    """
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = float(d1 @ d1)
    e = float(d2 @ d2)
    f = float(d2 @ r)
    tiny = 1e-18

    if a <= tiny and e <= tiny:
        return p1.copy(), p2.copy(), 0.5, 0.5
    if a <= tiny:
        t = min(max(f / e, 0.0), 1.0)
        return p1.copy(), p2 + t * d2, 0.5, t
    c = float(d1 @ r)
    if e <= tiny:
        s = min(max(-c / a, 0.0), 1.0)
        return p1 + s * d1, p2.copy(), s, 0.5

    b = float(d1 @ d2)
    denom = a * e - b * b
    if denom > 1e-12 * a * e:
        s = min(max((b * f - c * e) / denom, 0.0), 1.0)
    else:
        # Parallel lines: center the solution on the projected overlap.
        t0 = float(d1 @ (p2 - p1)) / a
        t1 = float(d1 @ (q2 - p1)) / a
        lo, hi = min(t0, t1), max(t0, t1)
        o_lo, o_hi = max(0.0, lo), min(1.0, hi)
        if o_lo <= o_hi:
            s = 0.5 * (o_lo + o_hi)
        else:
            # Disjoint projections: segment 2 lies entirely before or after.
            s = 0.0 if hi < 0.0 else 1.0
    t = (b * s + f) / e
    if t < 0.0:
        t = 0.0
        s = min(max(-c / a, 0.0), 1.0)
    elif t > 1.0:
        t = 1.0
        s = min(max((b - c) / a, 0.0), 1.0)
    return p1 + s * d1, p2 + t * d2, s, t


def collision_check(cap_i: Capsule, cap_j: Capsule) -> ContactResult:
    """Signed distance and scaled push directions between two capsules."""
    c_i, c_j, tau_i, tau_j = _segment_closest(cap_i.p1, cap_i.p2, cap_j.p1, cap_j.p2)
    offset = c_i - c_j
    dist = norm(offset)
    if dist > 1e-12:
        away_i = offset / dist
    else:
        # Segments intersect: push perpendicular to both, toward this
        # capsule's midpoint side, with a fixed fallback for parallel lines.
        axis = cross(cap_i.p2 - cap_i.p1, cap_j.p2 - cap_j.p1)
        if norm(axis) < EPS_DEGENERATE:
            seg = cap_i.p2 - cap_i.p1
            base = np.array([1.0, 0.0, 0.0])
            if abs(seg[0]) >= max(abs(seg[1]), abs(seg[2])):
                base = np.array([0.0, 1.0, 0.0])
            axis = cross(seg, base)
        away_i = normalize(axis)
        mids = 0.5 * (cap_i.p1 + cap_i.p2) - 0.5 * (cap_j.p1 + cap_j.p2)
        if float(away_i @ mids) < 0.0:
            away_i = -away_i
    d = dist - cap_i.radius - cap_j.radius
    return ContactResult(
        distance=d,
        normal_i=tau_i * away_i,
        normal_j=tau_j * (-away_i),
        tau_i=tau_i,
        tau_j=tau_j,
        point_i=c_i,
        point_j=c_j,
        direction_i=away_i,
    )


def _accumulate_gradients(
    tag: str, away: np.ndarray, tau: float
) -> list[tuple[str, np.ndarray]]:
    """Per-endpoint gradient contributions of one capsule of a contact pair.

    Endpoints share the push by the closest point's lever arm: the far end
    gets tau * away (the scaled contact normal), the near end the
    complementary (1 - tau) * away. Upper arms move only their elbow (the
    shoulder is anchored); the torso never moves."""
    near, far = CAPSULE_POINTS[tag]
    if tag == "torso":
        return []
    if tag.startswith("upper"):
        return [(far, tau * away)]
    return [(near, (1.0 - tau) * away), (far, tau * away)]


def xpbd_iter(
    cs: CapsuleSet, lambdas: dict[tuple[str, str], float], params: FilterParams
) -> tuple[CapsuleSet, dict[tuple[str, str], float]]:
    """One constraint pass over all collision pairs, then a length projection.

    Pairs separate when below the margin; a pair releases its multiplier at
    d >= d_rel, or at d >= d_act if it never engaged (hysteresis). Keypoints
    move in place; the same set is returned for convenience.
    """
    for tag_i, tag_j in COLLISION_PAIRS:
        key = (tag_i, tag_j)
        lam = lambdas.get(key, 0.0)
        contact = collision_check(cs.capsule(tag_i), cs.capsule(tag_j))
        d = contact.distance
        if d >= params.d_rel or (d >= params.d_act and lam == 0.0):
            lambdas[key] = 0.0
            continue
        violation = d - params.d_min
        if violation >= 0.0:
            continue
        moves: list[tuple[str, np.ndarray]] = []
        moves += _accumulate_gradients(tag_i, contact.direction_i, contact.tau_i)
        moves += _accumulate_gradients(tag_j, -contact.direction_i, contact.tau_j)
        denom = params.compliance
        for point_name, grad in moves:
            w = params.weights.get(_POINT_ROLE[point_name], 0.0)
            denom += w * float(grad @ grad)
        if denom <= 0.0:
            lambdas[key] = lam
            continue
        delta = -(violation + params.compliance * lam) / denom
        new_lam = max(0.0, lam + delta)
        step = new_lam - lam
        for point_name, grad in moves:
            w = params.weights.get(_POINT_ROLE[point_name], 0.0)
            if w != 0.0:
                cs.points[point_name] += w * step * grad
        lambdas[key] = new_lam

    length_lambdas = {tag: 0.0 for tag in CAPSULE_POINTS}
    xpbd_length_iter(cs, length_lambdas, params)
    return cs, lambdas


def xpbd_length_iter(
    cs: CapsuleSet, lambdas: dict[str, float], params: FilterParams
) -> CapsuleSet:
    """Project every capsule's segment back toward its reference length."""
    for tag, (a_name, b_name) in CAPSULE_POINTS.items():
        a = cs.points[a_name]
        b = cs.points[b_name]
        diff = b - a
        length = norm(diff)
        if length < params.length_eps:
            continue
        violation = length - cs.ref_lengths[tag]
        g_b = diff / length
        w_a = params.weights.get(_POINT_ROLE[a_name], 0.0)
        w_b = params.weights.get(_POINT_ROLE[b_name], 0.0)
        denom = params.compliance + w_a + w_b
        if denom <= 0.0 or (w_a == 0.0 and w_b == 0.0):
            continue
        lam = lambdas.get(tag, 0.0)
        delta = -(violation + params.compliance * lam) / denom
        lambdas[tag] = lam + delta
        if w_a != 0.0:
            cs.points[a_name] += w_a * delta * (-g_b)
        if w_b != 0.0:
            cs.points[b_name] += w_b * delta * g_b
    return cs


def recover_tool(tool_rot: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Minimal rotation of a tool frame that points its x-axis along `direction`."""
    if norm(direction) < EPS_DEGENERATE:
        raise DegenerateInputError("recover_tool: zero alignment direction")
    u_x = tool_rot[:, 0]
    u_t = direction / norm(direction)
    k = cross(u_x, u_t)
    s = norm(k)
    c = float(u_x @ u_t)
    if s < EPS_DEGENERATE:
        if c > 0.0:
            return tool_rot.copy()
        # Antiparallel: half-turn about the coordinate axis most orthogonal
        # to the pointing axis (smallest index on ties).
        idx = int(np.argmin(np.abs(u_x)))
        basis = np.zeros(3)
        basis[idx] = 1.0
        axis = normalize(basis - float(basis @ u_x) * u_x)
        return rodrigues(axis, math.pi) @ tool_rot
    return rodrigues(k / s, math.atan2(s, c)) @ tool_rot


@dataclass(frozen=True)
class PathCollisionResult:
    capsules: CapsuleSet
    collided: bool
    index: int
    n_interp: int


def find_first_collision(
    pair: ArmPair,
    q0: tuple[np.ndarray, np.ndarray],
    q_des: tuple[np.ndarray, np.ndarray],
) -> PathCollisionResult:
    """Capsules of the first colliding keypoint interpolant toward q_des.

    Keypoints (not joint angles) are interpolated linearly between the two
    poses; the step count scales the largest keypoint displacement by its
    capsule radius so nothing can tunnel between samples. Returns the desired
    pose's capsules when the whole path is clear.
    """
    kp0 = (fk(pair.left, q0[0]), fk(pair.right, q0[1]))
    kp_des = (fk(pair.left, q_des[0]), fk(pair.right, q_des[1]))

    def keypoint_radii(model: RobotArmModel) -> list[float]:
        r = model.capsule_radii
        return [
            r["upper"],
            min(r["upper"], r["lower"]),
            min(r["lower"], r["hand"]),
            r["hand"],
        ]

    steps = 0.0
    for side in (0, 1):
        model = pair.left if side == 0 else pair.right
        radii = keypoint_radii(model)
        for attr, radius in zip(("shoulder", "elbow", "wrist", "tool"), radii):
            travel = norm(getattr(kp_des[side], attr) - getattr(kp0[side], attr))
            steps = max(steps, travel / radius)
    n_interp = max(1, int(math.ceil(steps)))

    for i in range(1, n_interp + 1):
        alpha = i / n_interp
        interp = []
        for side in (0, 1):
            interp.append(
                ArmKeypoints(
                    shoulder=(1 - alpha) * kp0[side].shoulder + alpha * kp_des[side].shoulder,
                    elbow=(1 - alpha) * kp0[side].elbow + alpha * kp_des[side].elbow,
                    wrist=(1 - alpha) * kp0[side].wrist + alpha * kp_des[side].wrist,
                    tool=(1 - alpha) * kp0[side].tool + alpha * kp_des[side].tool,
                    tool_rot=kp_des[side].tool_rot,
                )
            )
        cs = make_capsules(pair, interp[0], interp[1])
        if cs.min_distance() < 0.0:
            return PathCollisionResult(capsules=cs, collided=True, index=i, n_interp=n_interp)
    cs = make_capsules(pair, kp_des[0], kp_des[1])
    return PathCollisionResult(capsules=cs, collided=False, index=n_interp, n_interp=n_interp)


@dataclass(frozen=True)
class FilterResult:
    q_left: np.ndarray
    q_right: np.ndarray
    status: str  # "safe" | "held"
    filter_active: bool
    iterations: int
    path_collided: bool
    min_distance: float  # recomputed on the output pose
    resolve_residual: float  # max keypoint gap between adjusted and output FK
    retarget_left: RetargetResult | None
    retarget_right: RetargetResult | None
    filter_time: float


def safety_filter(
    pair: ArmPair,
    q0: tuple[np.ndarray, np.ndarray],
    q_des: tuple[np.ndarray, np.ndarray],
    params: FilterParams | None = None,
) -> FilterResult:
    """Replace a desired bimanual pose with a self-collision-free one.

    The adjusted keypoints are mapped back to joint angles per arm (the
    closed-form solve acts as the inverse-kinematics step), chaining from the
    current pose; callers use the returned pose as the next call's q0. When
    the iteration budget runs out the current pose is returned with
    status="held".
    """
    t0 = time.perf_counter()
    params = params or FilterParams()
    path = find_first_collision(pair, q0, q_des)
    cs = path.capsules
    lambdas: dict[tuple[str, str], float] = {key: 0.0 for key in COLLISION_PAIRS}

    safe_at = -1
    for iteration in range(1, params.n_iter + 1):
        xpbd_iter(cs, lambdas, params)
        if cs.min_distance() >= params.d_min - params.exit_slack:
            safe_at = iteration
            break
    engaged = path.collided or any(lam > 0.0 for lam in lambdas.values())

    if safe_at < 0:
        out_min = make_capsules(
            pair, fk(pair.left, q0[0]), fk(pair.right, q0[1])
        ).min_distance()
        return FilterResult(
            q_left=q0[0].copy(),
            q_right=q0[1].copy(),
            status="held",
            filter_active=True,
            iterations=params.n_iter,
            path_collided=path.collided,
            min_distance=out_min,
            resolve_residual=0.0,
            retarget_left=None,
            retarget_right=None,
            filter_time=time.perf_counter() - t0,
        )

    results: dict[str, RetargetResult] = {}
    for side, model, q_init, q_target in (
        ("left", pair.left, q0[0], q_des[0]),
        ("right", pair.right, q0[1], q_des[1]),
    ):
        shoulder, elbow, wrist, tool = cs.arm_keypoints(side)
        desired_tool_rot = fk(model, q_target).tool_rot
        hand_rot = recover_tool(desired_tool_rot, tool - wrist)
        obs = HumanInput(shoulder=shoulder, elbow=elbow, wrist=wrist, hand_rot=hand_rot)
        results[side] = sew_mimic(model, q_init, obs)

    out_left = fk(pair.left, results["left"].q)
    out_right = fk(pair.right, results["right"].q)
    out_cs = make_capsules(pair, out_left, out_right)
    residual = 0.0
    for side, out in (("left", out_left), ("right", out_right)):
        s, e, w, t = cs.arm_keypoints(side)
        residual = max(
            residual,
            norm(out.shoulder - s),
            norm(out.elbow - e),
            norm(out.wrist - w),
            norm(out.tool - t),
        )

    return FilterResult(
        q_left=results["left"].q,
        q_right=results["right"].q,
        status="safe",
        filter_active=engaged,
        iterations=safe_at,
        path_collided=path.collided,
        min_distance=out_cs.min_distance(),
        resolve_residual=residual,
        retarget_left=results["left"],
        retarget_right=results["right"],
        filter_time=time.perf_counter() - t0,
    )
