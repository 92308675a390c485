"""Command-line interface: single-frame retargeting, trajectory replay and
benchmarking, synthetic motion generation, optimality audits, and the
interactive sandbox service.

Run `sewarm <subcommand> --help` for flags. The bundled sample arms are used
when no model files are given.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .oracle import oracle_solve, random_reachable_observation
from .replay import report_write, run_replay
from .retarget import sew_mimic, sync_frames
from .robot import ArmPair, load_model
from .safety import FilterParams
from .trajectory import load_trajectory, synth_rolling_punch, write_trajectory

CONFIG_DIR = Path(__file__).parent / "configs"


def bundled_config(name: str) -> Path:
    return CONFIG_DIR / f"{name}.toml"


def _load_pair(args) -> ArmPair:
    left = args.model_left or str(bundled_config("perpendicular_left"))
    right = args.model_right or str(bundled_config("perpendicular_right"))
    return ArmPair(left=load_model(left), right=load_model(right))


def _load_params(path: str | None) -> FilterParams:
    if not path:
        return FilterParams()
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return FilterParams(**raw)


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model-left", help="left arm description file (TOML)")
    parser.add_argument("--model-right", help="right arm description file (TOML)")


def cmd_synth(args) -> int:
    traj = synth_rolling_punch(
        duration=args.duration,
        rate=args.rate,
        rotations=args.rotations,
        circle_radius=args.radius,
    )
    write_trajectory(traj, args.out)
    print(f"wrote {len(traj)} frames to {args.out}")
    return 0


def cmd_replay(args) -> int:
    pair = _load_pair(args)
    traj = load_trajectory(args.traj)
    params = _load_params(args.params)
    report = run_replay(
        pair,
        traj,
        filter_on=args.filter == "on",
        params=params,
        warmup=args.warmup,
    )
    if args.out:
        report_write(report, args.out, fmt=args.format)
        print(f"wrote {len(report.rows)} rows to {args.out}")
    print(json.dumps(report.aggregates(), indent=2))
    return 0


def cmd_retarget(args) -> int:
    pair = _load_pair(args)
    traj = load_trajectory(args.traj)
    if not traj.frames:
        print("trajectory is empty", file=sys.stderr)
        return 1
    frame = traj.frames[min(args.frame, len(traj.frames) - 1)]
    out = {}
    for side, model, arm in (("left", pair.left, frame.left), ("right", pair.right, frame.right)):
        result = sew_mimic(model, np.zeros(7), sync_frames(arm))
        out[side] = {
            "q": [round(float(v), 9) for v in result.q],
            "costs": {
                "upper": result.cost_upper,
                "lower": result.cost_lower,
                "wrist": result.cost_wrist,
            },
            "clamped": list(result.clamped),
            "degenerate": list(result.degenerate),
            "gimbal": result.gimbal,
        }
    print(json.dumps(out, indent=2))
    return 0


def cmd_bench(args) -> int:
    model = load_model(args.model_right or str(bundled_config("perpendicular_right")))
    rng = np.random.default_rng(args.seed)
    q6_max = 1.4 if model.wrist_type == "perpendicular" else None
    observations = []
    poses = []
    for _ in range(args.frames + args.warmup):
        obs, q = random_reachable_observation(model, rng, q6_max=q6_max)
        observations.append(obs)
        poses.append(q)
    for obs, q in zip(observations[: args.warmup], poses[: args.warmup]):
        sew_mimic(model, q, obs)
    times = []
    for obs, q in zip(observations[args.warmup :], poses[args.warmup :]):
        t0 = time.perf_counter()
        sew_mimic(model, q, obs)
        times.append((time.perf_counter() - t0) * 1000.0)
    arr = np.array(times)
    q1, med, q3 = np.percentile(arr, [25, 50, 75])
    print(
        json.dumps(
            {
                "frames": len(arr),
                "median_ms": float(med),
                "iqr_ms": [float(q1), float(q3)],
                "mean_ms": float(np.mean(arr)),
                "rate_hz": 1000.0 / float(med),
            },
            indent=2,
        )
    )
    return 0


def cmd_oracle(args) -> int:
    model = load_model(args.model_right or str(bundled_config("perpendicular_right")))
    widened = model.widened()
    rng = np.random.default_rng(args.seed)
    q6_max = 1.4 if model.wrist_type == "perpendicular" else None
    worst_gap = -np.inf
    failures = 0
    for i in range(args.instances):
        obs, _ = random_reachable_observation(model, rng, q6_max=q6_max)
        closed = sew_mimic(widened, np.zeros(7), obs)
        reference = oracle_solve(widened, obs, starts=args.starts, seed=args.seed + i)
        gap = closed.total_cost - reference.cost
        worst_gap = max(worst_gap, gap)
        if gap > 1e-6:
            failures += 1
    print(
        json.dumps(
            {
                "instances": args.instances,
                "starts": args.starts,
                "worst_gap": worst_gap,
                "failures": failures,
            },
            indent=2,
        )
    )
    return 0 if failures == 0 else 1


def cmd_serve(args) -> int:
    from .service import serve

    pair = _load_pair(args)
    params = _load_params(args.params)
    serve(
        pair,
        host=args.host,
        port=args.port,
        params=params,
        static_dir=args.static,
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="sewarm", description=__doc__)
    parser.add_argument("--version", action="version", version=f"sewarm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the synthetic rolling-punch trajectory")
    p.add_argument("--out", required=True, help="output JSONL path")
    p.add_argument("--duration", type=float, default=10.0, help="seconds")
    p.add_argument("--rate", type=float, default=100.0, help="frames per second")
    p.add_argument("--rotations", type=float, default=10.0, help="full fist rotations")
    p.add_argument("--radius", type=float, default=0.10, help="fist circle radius (m)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("replay", help="replay a trajectory and report metrics")
    _add_model_flags(p)
    p.add_argument("--traj", required=True, help="trajectory JSONL path")
    p.add_argument("--filter", choices=["on", "off"], default="off")
    p.add_argument("--params", help="safety-filter parameter overrides (JSON)")
    p.add_argument("--out", help="report output path")
    p.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    p.add_argument("--warmup", type=int, default=100)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("retarget", help="retarget one trajectory frame and print q")
    _add_model_flags(p)
    p.add_argument("--traj", required=True)
    p.add_argument("--frame", type=int, default=0)
    p.set_defaults(func=cmd_retarget)

    p = sub.add_parser("bench", help="single-arm solve latency distribution")
    _add_model_flags(p)
    p.add_argument("--frames", type=int, default=10000)
    p.add_argument("--warmup", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle", help="audit optimality against the numerical oracle")
    _add_model_flags(p)
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--starts", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("serve", help="run the interactive sandbox service")
    _add_model_flags(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None, help="default: SEW_SANDBOX_PORT or 8765")
    p.add_argument("--params", help="safety-filter parameter overrides (JSON)")
    p.add_argument("--static", help="directory of UI assets to serve over HTTP")
    p.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
