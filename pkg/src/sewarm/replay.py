"""Trajectory replay: frame-by-frame retargeting with optional safety
filtering, per-frame metrics, and report serialization.

Report rows carry, per frame: the three alignment cost terms per arm (squared
orientation errors), wall-clock solve and filter times, whether the output
pose self-collides, and the fallback flags. Aggregates (median, IQR, mean,
fractions) are always recomputed from the rows past the warm-up window, so a
report read back from disk agrees with the in-memory one.

Column order (stable, see docs/report_format.md):
    frame, t, upper_left, lower_left, wrist_left, upper_right, lower_right,
    wrist_right, total, solve_ms, filter_ms, collision, clamped, degenerate,
    gimbal, held, filter_active
"""
from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .retarget import cost_terms, sew_mimic, sync_frames
from .robot import ArmPair, fk
from .safety import FilterParams, make_capsules, safety_filter
from .trajectory import KeypointTrajectory

COLUMNS = [
    "frame",
    "t",
    "upper_left",
    "lower_left",
    "wrist_left",
    "upper_right",
    "lower_right",
    "wrist_right",
    "total",
    "solve_ms",
    "filter_ms",
    "collision",
    "clamped",
    "degenerate",
    "gimbal",
    "held",
    "filter_active",
]

_FLOAT_COLUMNS = {
    "t",
    "upper_left",
    "lower_left",
    "wrist_left",
    "upper_right",
    "lower_right",
    "wrist_right",
    "total",
    "solve_ms",
    "filter_ms",
}
_INT_COLUMNS = {"frame", "clamped", "degenerate"}
_BOOL_COLUMNS = {"collision", "gimbal", "held", "filter_active"}


@dataclass(frozen=True)
class FrameRecord:
    frame: int
    t: float
    upper_left: float
    lower_left: float
    wrist_left: float
    upper_right: float
    lower_right: float
    wrist_right: float
    total: float
    solve_ms: float
    filter_ms: float
    collision: bool
    clamped: int
    degenerate: int
    gimbal: bool
    held: bool
    filter_active: bool


@dataclass
class ReplayReport:
    rows: list[FrameRecord]
    warmup: int = 0
    meta: dict = field(default_factory=dict)

    def measured_rows(self) -> list[FrameRecord]:
        return self.rows[self.warmup :]

    def aggregates(self) -> dict:
        rows = self.measured_rows()
        if not rows:
            return {"frames": 0}
        totals = np.array([r.total for r in rows])
        solve = np.array([r.solve_ms for r in rows])
        filt = np.array([r.filter_ms for r in rows])

        def stats(x: np.ndarray) -> dict:
            q1, med, q3 = np.percentile(x, [25, 50, 75])
            return {
                "median": float(med),
                "iqr": [float(q1), float(q3)],
                "mean": float(np.mean(x)),
            }

        return {
            "frames": len(rows),
            "total_error": stats(totals),
            "solve_ms": stats(solve),
            "filter_ms": stats(filt),
            "collision_fraction": float(np.mean([r.collision for r in rows])),
            "clamped_frames": int(np.sum([r.clamped > 0 for r in rows])),
            "degenerate_frames": int(np.sum([r.degenerate > 0 for r in rows])),
            "gimbal_frames": int(np.sum([r.gimbal for r in rows])),
            "held_frames": int(np.sum([r.held for r in rows])),
            "filter_active_frames": int(np.sum([r.filter_active for r in rows])),
        }


def run_replay(
    pair: ArmPair,
    traj: KeypointTrajectory,
    filter_on: bool = False,
    params: FilterParams | None = None,
    warmup: int = 100,
    q_start: tuple[np.ndarray, np.ndarray] | None = None,
) -> ReplayReport:
    """Sequential per-frame retargeting of a trajectory, chaining each frame's
    solution into the next. Timing is measured around the solve calls only.
    """
    params = params or FilterParams()
    q_left = (q_start[0] if q_start else pair.left.clamp(np.zeros(7))).copy()
    q_right = (q_start[1] if q_start else pair.right.clamp(np.zeros(7))).copy()

    rows: list[FrameRecord] = []
    for index, frame in enumerate(traj.frames):
        obs_left = sync_frames(frame.left)
        obs_right = sync_frames(frame.right)

        t0 = time.perf_counter()
        res_left = sew_mimic(pair.left, q_left, obs_left)
        res_right = sew_mimic(pair.right, q_right, obs_right)
        solve_ms = (time.perf_counter() - t0) * 1000.0

        held = False
        filter_active = False
        filter_ms = 0.0
        if filter_on:
            t1 = time.perf_counter()
            fres = safety_filter(pair, (q_left, q_right), (res_left.q, res_right.q), params)
            filter_ms = (time.perf_counter() - t1) * 1000.0
            q_left, q_right = fres.q_left, fres.q_right
            held = fres.status == "held"
            filter_active = fres.filter_active
            upper_left, lower_left, wrist_left = cost_terms(pair.left, q_left, obs_left)
            upper_right, lower_right, wrist_right = cost_terms(
                pair.right, q_right, obs_right
            )
            total = (
                upper_left
                + lower_left
                + wrist_left
                + upper_right
                + lower_right
                + wrist_right
            )
        else:
            q_left, q_right = res_left.q, res_right.q
            upper_left, lower_left, wrist_left = (
                res_left.cost_upper,
                res_left.cost_lower,
                res_left.cost_wrist,
            )
            upper_right, lower_right, wrist_right = (
                res_right.cost_upper,
                res_right.cost_lower,
                res_right.cost_wrist,
            )
            total = res_left.total_cost + res_right.total_cost

        capsules = make_capsules(pair, fk(pair.left, q_left), fk(pair.right, q_right))
        collision = capsules.min_distance() < 0.0

        rows.append(
            FrameRecord(
                frame=index,
                t=frame.t,
                upper_left=upper_left,
                lower_left=lower_left,
                wrist_left=wrist_left,
                upper_right=upper_right,
                lower_right=lower_right,
                wrist_right=wrist_right,
                total=total,
                solve_ms=solve_ms,
                filter_ms=filter_ms,
                collision=collision,
                clamped=len(res_left.clamped) + len(res_right.clamped),
                degenerate=len(res_left.degenerate) + len(res_right.degenerate),
                gimbal=res_left.gimbal or res_right.gimbal,
                held=held,
                filter_active=filter_active,
            )
        )

    return ReplayReport(
        rows=rows,
        warmup=min(warmup, len(rows)),
        meta={
            "source": traj.source,
            "filter": filter_on,
            "params": params.to_dict(),
            "models": [pair.left.name, pair.right.name],
        },
    )


def report_write(report: ReplayReport, path: str | Path, fmt: str = "csv") -> None:
    """Write the per-frame rows in the documented column order."""
    path = Path(path)
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(COLUMNS)
            for row in report.rows:
                record = asdict(row)
                writer.writerow(
                    [int(record[c]) if c in _BOOL_COLUMNS else record[c] for c in COLUMNS]
                )
    elif fmt == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for row in report.rows:
                record = asdict(row)
                fh.write(json.dumps({c: record[c] for c in COLUMNS}) + "\n")
    else:
        raise ValueError(f"unknown report format {fmt!r} (use 'csv' or 'jsonl')")


def report_read(path: str | Path, warmup: int = 0) -> ReplayReport:
    """Read rows back; aggregates are recomputed, not stored."""
    path = Path(path)
    rows: list[FrameRecord] = []

    def build(record: dict) -> FrameRecord:
        kwargs = {}
        for c in COLUMNS:
            v = record[c]
            if c in _FLOAT_COLUMNS:
                kwargs[c] = float(v)
            elif c in _INT_COLUMNS:
                kwargs[c] = int(v)
            else:
                kwargs[c] = bool(int(v)) if not isinstance(v, bool) else v
        return FrameRecord(**kwargs)

    if path.suffix == ".jsonl":
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rows.append(build(json.loads(line)))
    else:
        with open(path, "r", newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != COLUMNS:
                raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
            for record in reader:
                rows.append(build(record))
    return ReplayReport(rows=rows, warmup=warmup)
