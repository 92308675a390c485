"""Independent brute-force oracles used to check the closed-form solvers.

Everything here evaluates the subproblem objectives directly on dense angle
lattices; none of it shares code paths with the solvers under test. For a
rotation about a unit axis k, the objective terms expand to
a*cos(t) + b*sin(t) + c with instance-specific constants, so each lattice
evaluation is exact and vectorizes over precomputed cos/sin tables.
"""
from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi

_TABLES: dict[float, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def angle_lattice(step: float) -> np.ndarray:
    """Lattice covering (-pi, pi] with the given step."""
    n = int(round(TWO_PI / step))
    return -math.pi + step * np.arange(1, n + 1)


def _tables(step: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if step not in _TABLES:
        grid = angle_lattice(step)
        _TABLES[step] = (grid, np.cos(grid), np.sin(grid))
    return _TABLES[step]


def _rotation_dot(p: np.ndarray, k: np.ndarray, h: np.ndarray, step: float) -> np.ndarray:
    """h . R(k, t) p for every lattice angle t."""
    grid, cos_t, sin_t = _tables(step)
    kxp = np.cross(k, p)
    a = float(h @ p) - float(h @ k) * float(k @ p)
    b = float(h @ kxp)
    c = float(h @ k) * float(k @ p)
    return a * cos_t + b * sin_t + c


def rotate_grid(k: np.ndarray, thetas: np.ndarray, p: np.ndarray) -> np.ndarray:
    """R(k, theta) p for every theta, shape (N, 3). Direct Rodrigues expansion."""
    c = np.cos(thetas)[:, None]
    s = np.sin(thetas)[:, None]
    kxp = np.cross(k, p)
    return p * c + kxp * s + k * (np.dot(k, p)) * (1.0 - c)


def sp1_grid_min(p1, p2, k, step=1e-4):
    """(theta, residual) minimizing ||R(k,t) p1 - p2|| on the angle lattice."""
    grid, _, _ = _tables(step)
    # ||R p1 - p2||^2 = ||p1||^2 + ||p2||^2 - 2 p2 . R(k,t) p1
    dots = _rotation_dot(p1, k, p2, step)
    res_sq = float(p1 @ p1) + float(p2 @ p2) - 2.0 * dots
    i = int(np.argmin(res_sq))
    return float(grid[i]), math.sqrt(max(float(res_sq[i]), 0.0))


def sp4_grid_min(p, h, k, d, step=1e-4):
    """(thetas, residual) minimizing |h . R(k,t) p - d| on the angle lattice.

    Returns every lattice angle within one lattice-step worth of slack of the
    minimum, so double roots are both reported.
    """
    grid, _, _ = _tables(step)
    vals = np.abs(_rotation_dot(p, k, h, step) - d)
    vmin = float(np.min(vals))
    slack = 2.0 * step  # |d/dt h.R p| <= ||p||; inputs here are unit scale
    keep = grid[vals <= vmin + slack]
    return keep, vmin


def sp2_lattice_min(p1, p2, k1, k2, fine=1e-3, coarse_stride=50):
    """Global minimum of ||R(k1,t1) p1 - R(k2,t2) p2|| over the fine 2-D lattice.

    Evaluated hierarchically: a strided coarse pass over the fine lattice
    bounds the basins, then every fine point inside candidate coarse cells is
    evaluated. With unit inputs the objective moves at most one unit per
    radian per axis, so a coarse cell (half-width `coarse_stride` fine steps
    per axis) can hide a fine minimum at most 2 * coarse_stride * fine below
    its corner value; the margin is taken double that.

    Returns (t1, t2, residual) of the best fine lattice point.
    """
    p1 = p1 / np.linalg.norm(p1)
    p2 = p2 / np.linalg.norm(p2)
    grid, _, _ = _tables(fine)
    n = len(grid)
    a_all = rotate_grid(k1, grid, p1)
    b_all = rotate_grid(k2, grid, p2)

    coarse_idx = np.arange(0, n, coarse_stride)
    a_c = a_all[coarse_idx]
    b_c = b_all[coarse_idx]
    f_c = np.sqrt(np.maximum(2.0 - 2.0 * (a_c @ b_c.T), 0.0))
    fmin = float(np.min(f_c))
    margin = 4.0 * coarse_stride * fine
    cells = np.argwhere(f_c <= fmin + margin)

    half = coarse_stride  # fine steps to each side of a coarse point
    best = (0.0, 0.0, math.inf)
    for ci, cj in cells:
        sel1 = np.arange(coarse_idx[ci] - half, coarse_idx[ci] + half + 1) % n
        sel2 = np.arange(coarse_idx[cj] - half, coarse_idx[cj] + half + 1) % n
        patch = 2.0 - 2.0 * (a_all[sel1] @ b_all[sel2].T)
        ii, jj = np.unravel_index(int(np.argmin(patch)), patch.shape)
        value = math.sqrt(max(float(patch[ii, jj]), 0.0))
        if value < best[2]:
            best = (float(grid[sel1[ii]]), float(grid[sel2[jj]]), value)
    return best


def sp2_pair_residual(p1, p2, k1, k2, t1, t2) -> float:
    p1 = p1 / np.linalg.norm(p1)
    p2 = p2 / np.linalg.norm(p2)
    r1 = rotate_grid(k1, np.array([t1]), p1)[0]
    r2 = rotate_grid(k2, np.array([t2]), p2)[0]
    return float(np.linalg.norm(r1 - r2))


def sp2_is_local_min(p1, p2, k1, k2, t1, t2, delta=1e-3, tol=None) -> bool:
    """True if (t1, t2) is a local minimum of the pair residual on a delta-grid."""
    if tol is None:
        tol = 2.0 * delta  # first-order slack for an off-lattice optimum
    center = sp2_pair_residual(p1, p2, k1, k2, t1, t2)
    for d1 in (-delta, 0.0, delta):
        for d2 in (-delta, 0.0, delta):
            if d1 == 0.0 and d2 == 0.0:
                continue
            if sp2_pair_residual(p1, p2, k1, k2, t1 + d1, t2 + d2) < center - tol:
                return False
    return True
