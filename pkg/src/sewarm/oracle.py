"""Numerical multi-start minimizer over joint angles, used as an independent
check that the closed-form solve is optimal.

Each start runs a bounded Nelder-Mead search on the total alignment cost.
This path shares no geometry with the closed-form pipeline beyond the cost
definition itself, which is exactly what makes the comparison meaningful.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .retarget import HumanInput, total_cost
from .robot import RobotArmModel

# A start that gets this close to zero cannot be beaten by more than the
# comparison tolerance; further starts are redundant.
EARLY_STOP_COST = 1e-8


@dataclass(frozen=True)
class OracleResult:
    q: np.ndarray
    cost: float
    starts_used: int


def oracle_solve(
    model: RobotArmModel,
    observation: HumanInput,
    starts: int = 50,
    seed: int = 0,
    init: np.ndarray | None = None,
    coarse_evals: int = 250,
    polish_evals: int = 700,
    polish_below: float = 1e-2,
) -> OracleResult:
    """Best cost found by `starts` local searches from random in-limit poses.

    Each start runs a coarse search; candidates that land near zero are
    polished with a tighter search. An explicit `init` is used as the first
    start (warm start); remaining starts are drawn uniformly within the
    joint limits.
    """
    rng = np.random.default_rng(seed)
    bounds = list(zip(model.limits_low, model.limits_high))

    def cost(q: np.ndarray) -> float:
        return total_cost(model, q, observation)

    def search(x0: np.ndarray, maxfev: int, fatol: float):
        return minimize(
            cost,
            x0,
            method="Nelder-Mead",
            bounds=bounds,
            options={"maxfev": maxfev, "xatol": 1e-8, "fatol": fatol, "adaptive": True},
        )

    best_q: np.ndarray | None = None
    best_cost = np.inf
    used = 0
    for i in range(starts):
        if i == 0 and init is not None:
            x0 = np.asarray(init, dtype=float)
        else:
            x0 = rng.uniform(model.limits_low, model.limits_high)
        res = search(x0, coarse_evals, fatol=1e-4)
        if res.fun < polish_below:
            res = search(res.x, polish_evals, fatol=1e-12)
            if res.fun > EARLY_STOP_COST:
                # Restarting with a fresh simplex escapes collapse stagnation.
                res = search(res.x, polish_evals, fatol=1e-12)
        used = i + 1
        if res.fun < best_cost:
            best_cost = float(res.fun)
            best_q = np.asarray(res.x)
        if best_cost < EARLY_STOP_COST:
            break
    assert best_q is not None
    return OracleResult(q=best_q, cost=best_cost, starts_used=used)


def random_reachable_observation(
    model: RobotArmModel, rng: np.random.Generator, q6_max: float | None = None
) -> tuple[HumanInput, np.ndarray]:
    """Observation generated from a random in-limit pose (and that pose)."""
    from .retarget import observation_from_fk

    q = rng.uniform(model.limits_low, model.limits_high)
    if q6_max is not None:
        q[5] = rng.uniform(-q6_max, q6_max)
    return observation_from_fk(model, q), q
