"""Closed-form geometric subproblems: rotate vectors about fixed axes so they
align with targets or planes.

Three canonical problems are solved here:

* ``sp1(p1, p2, k)``: one angle, rotate p1 about k as close as possible to p2.
* ``sp4(p, h, k, d)``: one angle, rotate p about k so that h . R(k,t) p = d
  (onto a plane), with a least-squares fallback when the plane is out of
  reach. Zero, one or two exact solutions exist.
* ``sp2(p1, p2, k1, k2)``: two angles, rotate p1 about k1 and p2 about k2 so
  the rotated vectors coincide. Built from two sp4 instances.

All returned angles are canonicalized to (-pi, pi].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import DegenerateInputError, EPS_DEGENERATE, cross, norm, rotate, wrap_angle

# Residual below which a reconstructed solution counts as exact.
EXACT_TOL = 1e-9

# Double roots closer than this are merged (tangency duplicates).
ROOT_MERGE_TOL = 1e-7


@dataclass(frozen=True)
class AngleSolutionSet:
    """Angles solving a one-axis subproblem.

    ``exact`` is True when the geometric constraint is satisfiable (residual
    zero in exact arithmetic); otherwise the single angle is the least-squares
    minimizer. ``degenerate`` marks the no-information case where rotation
    cannot affect the constraint at all.
    """

    angles: tuple[float, ...]
    exact: bool
    degenerate: bool = False


@dataclass(frozen=True)
class AnglePairSolutionSet:
    """Angle pairs (theta1, theta2) solving a two-axis alignment."""

    pairs: tuple[tuple[float, float], ...]
    exact: bool
    degenerate: bool = False


def sp1(p1: np.ndarray, p2: np.ndarray, k: np.ndarray) -> float:
    """Angle minimizing || R(k, theta) p1 - p2 ||.

    Projects both vectors into the plane perpendicular to k and measures the
    in-plane angle. Raises DegenerateInputError when either projection is
    near zero (vector collinear with the axis); the caller decides the
    fallback.
    """
    q1 = p1 - (p1[0] * k[0] + p1[1] * k[1] + p1[2] * k[2]) * k
    q2 = p2 - (p2[0] * k[0] + p2[1] * k[1] + p2[2] * k[2]) * k
    n1, n2 = norm(q1), norm(q2)
    if n1 < EPS_DEGENERATE or n2 < EPS_DEGENERATE:
        raise DegenerateInputError("sp1: input collinear with rotation axis")
    q1 /= n1
    q2 /= n2
    theta = 2.0 * math.atan2(norm(q1 - q2), norm(q1 + q2))
    c = cross(q1, q2)
    if k[0] * c[0] + k[1] * c[1] + k[2] * c[2] < 0.0:
        theta = -theta
    return wrap_angle(theta)


def sp4(p: np.ndarray, h: np.ndarray, k: np.ndarray, d: float) -> AngleSolutionSet:
    """Angles theta with h . R(k, theta) p = d, else the least-squares angle.

    The rotated tip traces a circle; writing the constraint as a linear
    system A [sin t, cos t]^T = b, two roots exist when ||A||^2 > b^2 (the
    plane cuts the circle) and are obtained by offsetting A^T b along the
    nullspace direction [A2, -A1] by sqrt(||A||^2 - b^2); both terms then
    carry the same ||A||^2 scale, so atan2 recovers the on-circle angles.
    """
    kxp = cross(k, p)
    kxkxp = cross(k, kxp)
    # A = h^T [k x p, -(k x)^2 p],  b = d - (h.k)(k.p)
    a1 = h[0] * kxp[0] + h[1] * kxp[1] + h[2] * kxp[2]
    a2 = -(h[0] * kxkxp[0] + h[1] * kxkxp[1] + h[2] * kxkxp[2])
    b = d - (h[0] * k[0] + h[1] * k[1] + h[2] * k[2]) * (
        k[0] * p[0] + k[1] * p[1] + k[2] * p[2]
    )
    norm_a_sq = a1 * a1 + a2 * a2

    if norm_a_sq < EPS_DEGENERATE * EPS_DEGENERATE:
        # Rotation cannot change the plane distance at all.
        return AngleSolutionSet(angles=(0.0,), exact=abs(b) < EXACT_TOL, degenerate=True)

    if norm_a_sq > b * b:
        z = math.sqrt(norm_a_sq - b * b)
        # x~ = A^T b +/- z [A2, -A1]; positive multiple of the unit-circle solution.
        s_plus = (a1 * b + z * a2, a2 * b - z * a1)
        s_minus = (a1 * b - z * a2, a2 * b + z * a1)
        t_plus = wrap_angle(math.atan2(s_plus[0], s_plus[1]))
        t_minus = wrap_angle(math.atan2(s_minus[0], s_minus[1]))
        if abs(t_plus - t_minus) < ROOT_MERGE_TOL:
            return AngleSolutionSet(angles=(t_plus,), exact=True)
        return AngleSolutionSet(angles=(t_plus, t_minus), exact=True)

    theta = wrap_angle(math.atan2(a1 * b, a2 * b))
    exact = abs(math.sqrt(norm_a_sq) - abs(b)) < EXACT_TOL
    return AngleSolutionSet(angles=(theta,), exact=exact)


def _pair_residual(
    p1: np.ndarray, p2: np.ndarray, k1: np.ndarray, k2: np.ndarray, t1: float, t2: float
) -> float:
    diff = rotate(k1, t1, p1) - rotate(k2, t2, p2)
    return norm(diff)


def sp2(
    p1: np.ndarray, p2: np.ndarray, k1: np.ndarray, k2: np.ndarray
) -> AnglePairSolutionSet:
    """Angle pairs with R(k1, t1) p1 aligned to R(k2, t2) p2 (after normalizing).

    Each angle separately solves an sp4 instance: rotating p1 about k1 cannot
    change k1 . p1, so at a common solution vector v we must have
    k2 . v = k2 . p2 and k1 . v = k1 . p1. Candidate pairs are formed across
    the two root sets and validated by reconstruction residual: pairs below
    EXACT_TOL are kept (exact), otherwise only the minimal-residual pair is
    returned with exact=False.
    """
    n1, n2 = norm(p1), norm(p2)
    if n1 < EPS_DEGENERATE or n2 < EPS_DEGENERATE:
        raise DegenerateInputError("sp2: zero-length input vector")
    q1 = p1 / n1
    q2 = p2 / n2

    set1 = sp4(q1, k2, k1, k2[0] * q2[0] + k2[1] * q2[1] + k2[2] * q2[2])
    set2 = sp4(q2, k1, k2, k1[0] * q1[0] + k1[1] * q1[1] + k1[2] * q1[2])
    degenerate = set1.degenerate or set2.degenerate

    candidates: list[tuple[float, float, float]] = []
    for t1 in set1.angles:
        for t2 in set2.angles:
            candidates.append((_pair_residual(q1, q2, k1, k2, t1, t2), t1, t2))
    candidates.sort(key=lambda c: c[0])

    exact_pairs = [(t1, t2) for r, t1, t2 in candidates if r < EXACT_TOL]
    if exact_pairs:
        seen: list[tuple[float, float]] = []
        for pair in exact_pairs:
            if not any(
                abs(pair[0] - s[0]) < ROOT_MERGE_TOL and abs(pair[1] - s[1]) < ROOT_MERGE_TOL
                for s in seen
            ):
                seen.append(pair)
        return AnglePairSolutionSet(pairs=tuple(seen), exact=True, degenerate=degenerate)

    best = candidates[0]
    return AnglePairSolutionSet(pairs=((best[1], best[2]),), exact=False, degenerate=degenerate)
