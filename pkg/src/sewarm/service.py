"""Interactive sandbox service: a local WebSocket endpoint that retargets
streamed keypoint updates in real time.

One session per connection; each session owns its chained joint state, filter
toggle, and parameters, and replies strictly in request order. Message
handling is a pure function over the session state so it can be exercised
without sockets. In dev mode the server also answers plain HTTP requests with
the UI's static assets.

Wire protocol (JSON text frames, schema in docs/protocol.md), version 1:

    -> {"type": "update", "seq": 7, "torso": [x,y,z],
        "left":  {"s": [..], "e": [..], "w": [..], "hand_quat": [x,y,z,w]},
        "right": {...}}
    <- {"type": "state", "seq": 7, "frame": 41, "solve_ms": .., "filter_ms": ..,
        "filter_active": false, "held": false,
        "left": {"q": [..7], "s": [..], "e": [..], "w": [..], "t": [..],
                 "tool_quat": [..], "costs": {...}, "flags": {...}},
        "right": {...},
        "capsules": [{"tag": .., "p1": [..], "p2": [..], "r": ..}, ...],
        "pair_distances": [["tag_a", "tag_b", d], ...], "min_distance": d}
    -> {"type": "config", "filter": true, "params": {...}, "reset": false}
    <- {"type": "ack", "filter": true, "params": {...}}
    <- {"type": "error", "message": "..."}  (state unchanged)

Positions are meters in the body-centric frame; orientations are unit
quaternions (x, y, z, w).
"""
from __future__ import annotations

import asyncio
import dataclasses
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import quat_to_rot, rot_to_quat
from .retarget import HumanInput, RetargetResult, sew_mimic, sync_frames
from .robot import ArmPair, fk
from .safety import FilterParams, make_capsules, safety_filter

PROTOCOL_VERSION = 1
DEFAULT_PORT = 8765
PORT_ENV_VAR = "SEW_SANDBOX_PORT"

DEFAULT_TORSO_ANCHOR = [0.0, 0.0, -0.5]


class ProtocolError(ValueError):
    """Malformed client message; the session state is left unchanged."""


@dataclass
class SessionState:
    pair: ArmPair
    q_left: np.ndarray
    q_right: np.ndarray
    params: FilterParams
    filter_on: bool = True
    frame_count: int = 0

    @classmethod
    def create(cls, pair: ArmPair, params: FilterParams | None = None) -> "SessionState":
        return cls(
            pair=pair,
            q_left=pair.left.clamp(np.zeros(7)),
            q_right=pair.right.clamp(np.zeros(7)),
            params=params or FilterParams(),
        )


def _vec(raw, where: str) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != 3:
        raise ProtocolError(f"{where}: expected [x, y, z]")
    try:
        return np.array([float(v) for v in raw])
    except (TypeError, ValueError) as exc:
        raise ProtocolError(f"{where}: non-numeric coordinate") from exc


def _parse_update_arm(payload: dict, side: str, torso, s_left, s_right) -> HumanInput:
    arm = payload.get(side)
    if not isinstance(arm, dict):
        raise ProtocolError(f"update: missing '{side}' arm payload")
    for key in ("s", "e", "w"):
        if key not in arm:
            raise ProtocolError(f"update.{side}: missing keypoint '{key}'")
    quat = arm.get("hand_quat")
    if not isinstance(quat, list) or len(quat) != 4:
        raise ProtocolError(f"update.{side}: missing hand_quat [x, y, z, w]")
    return HumanInput(
        shoulder=_vec(arm["s"], f"update.{side}.s"),
        elbow=_vec(arm["e"], f"update.{side}.e"),
        wrist=_vec(arm["w"], f"update.{side}.w"),
        hand_rot=quat_to_rot(np.array([float(v) for v in quat])),
        torso_anchor=torso,
        shoulder_left=s_left,
        shoulder_right=s_right,
    )


def _arm_reply(model, q: np.ndarray, kp, result: RetargetResult | None) -> dict:
    reply = {
        "q": [float(v) for v in q],
        "s": kp.shoulder.tolist(),
        "e": kp.elbow.tolist(),
        "w": kp.wrist.tolist(),
        "t": kp.tool.tolist(),
        "tool_quat": rot_to_quat(kp.tool_rot).tolist(),
    }
    if result is not None:
        reply["costs"] = {
            "upper": result.cost_upper,
            "lower": result.cost_lower,
            "wrist": result.cost_wrist,
        }
        reply["flags"] = {
            "clamped": list(result.clamped),
            "degenerate": list(result.degenerate),
            "gimbal": result.gimbal,
        }
    return reply


def _state_reply(
    state: SessionState,
    seq,
    solve_ms: float,
    filter_ms: float,
    filter_active: bool,
    held: bool,
    results: dict[str, RetargetResult | None],
) -> dict:
    kp_left = fk(state.pair.left, state.q_left)
    kp_right = fk(state.pair.right, state.q_right)
    capsules = make_capsules(state.pair, kp_left, kp_right)
    pair_distances = capsules.pair_distances()
    return {
        "type": "state",
        "seq": seq,
        "frame": state.frame_count,
        "solve_ms": solve_ms,
        "filter_ms": filter_ms,
        "filter_on": state.filter_on,
        "filter_active": filter_active,
        "held": held,
        "left": _arm_reply(state.pair.left, state.q_left, kp_left, results.get("left")),
        "right": _arm_reply(state.pair.right, state.q_right, kp_right, results.get("right")),
        "capsules": [
            {
                "tag": cap.tag,
                "p1": cap.p1.tolist(),
                "p2": cap.p2.tolist(),
                "r": cap.radius,
            }
            for cap in capsules.capsules()
        ],
        "pair_distances": [[a, b, d] for a, b, d in pair_distances],
        "min_distance": min(d for _, _, d in pair_distances),
    }


def handle_update(state: SessionState, msg: dict) -> dict:
    torso = (
        _vec(msg["torso"], "update.torso")
        if "torso" in msg
        else np.array(DEFAULT_TORSO_ANCHOR)
    )
    left_raw = msg.get("left", {})
    right_raw = msg.get("right", {})
    if not isinstance(left_raw, dict) or not isinstance(right_raw, dict):
        raise ProtocolError("update: arm payloads must be objects")
    s_left = _vec(
        msg.get("shoulder_left", left_raw.get("s")), "update.shoulder_left"
    )
    s_right = _vec(
        msg.get("shoulder_right", right_raw.get("s")), "update.shoulder_right"
    )
    obs_left = _parse_update_arm(msg, "left", torso, s_left, s_right)
    obs_right = _parse_update_arm(msg, "right", torso, s_left, s_right)

    t0 = time.perf_counter()
    synced_left = sync_frames(obs_left)
    synced_right = sync_frames(obs_right)
    res_left = sew_mimic(state.pair.left, state.q_left, synced_left)
    res_right = sew_mimic(state.pair.right, state.q_right, synced_right)
    solve_ms = (time.perf_counter() - t0) * 1000.0

    filter_ms = 0.0
    filter_active = False
    held = False
    if state.filter_on:
        t1 = time.perf_counter()
        fres = safety_filter(
            state.pair,
            (state.q_left, state.q_right),
            (res_left.q, res_right.q),
            state.params,
        )
        filter_ms = (time.perf_counter() - t1) * 1000.0
        state.q_left, state.q_right = fres.q_left, fres.q_right
        filter_active = fres.filter_active
        held = fres.status == "held"
    else:
        state.q_left, state.q_right = res_left.q, res_right.q

    state.frame_count += 1
    return _state_reply(
        state,
        msg.get("seq"),
        solve_ms,
        filter_ms,
        filter_active,
        held,
        {"left": res_left, "right": res_right},
    )


def handle_config(state: SessionState, msg: dict) -> dict:
    known = {"type", "seq", "filter", "params", "reset"}
    unknown = set(msg) - known
    if unknown:
        raise ProtocolError(f"config: unknown fields {sorted(unknown)}")
    new_filter = state.filter_on
    if "filter" in msg:
        if not isinstance(msg["filter"], bool):
            raise ProtocolError("config.filter: expected a boolean")
        new_filter = msg["filter"]
    new_params = state.params
    if "params" in msg:
        if not isinstance(msg["params"], dict):
            raise ProtocolError("config.params: expected an object")
        merged = state.params.to_dict()
        for key, value in msg["params"].items():
            if key not in merged:
                raise ProtocolError(f"config.params: unknown parameter '{key}'")
            merged[key] = value
        try:
            new_params = FilterParams(**merged)
        except (TypeError, ValueError) as exc:
            raise ProtocolError(f"config.params: {exc}") from exc
    # Validation passed: apply atomically.
    state.filter_on = new_filter
    state.params = new_params
    if msg.get("reset"):
        state.q_left = state.pair.left.clamp(np.zeros(7))
        state.q_right = state.pair.right.clamp(np.zeros(7))
        state.frame_count = 0
    return {
        "type": "ack",
        "seq": msg.get("seq"),
        "filter": state.filter_on,
        "params": state.params.to_dict(),
    }


def handle_message(state: SessionState, raw: str) -> dict:
    """Dispatch one wire message; errors leave the state untouched."""
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError as exc:
        return {"type": "error", "message": f"invalid JSON: {exc}"}
    if not isinstance(msg, dict) or "type" not in msg:
        return {"type": "error", "message": "message must be an object with a 'type'"}
    try:
        if msg["type"] == "update":
            return handle_update(state, msg)
        if msg["type"] == "config":
            return handle_config(state, msg)
        raise ProtocolError(f"unknown message type {msg['type']!r}")
    except ProtocolError as exc:
        return {"type": "error", "seq": msg.get("seq"), "message": str(exc)}


def hello_message(state: SessionState) -> dict:
    return {
        "type": "hello",
        "version": PROTOCOL_VERSION,
        "models": {"left": state.pair.left.name, "right": state.pair.right.name},
        "filter": state.filter_on,
        "params": state.params.to_dict(),
        "capsule_radii": dict(
            left=state.pair.left.capsule_radii,
            right=state.pair.right.capsule_radii,
            torso=state.pair.torso.radius,
        ),
    }


# --- server ------------------------------------------------------------------

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
}


def _static_response(static_dir: Path, request_path: str):
    from websockets.datastructures import Headers
    from websockets.http11 import Response

    name = request_path.split("?", 1)[0]
    if name in ("", "/"):
        name = "/index.html"
    target = (static_dir / name.lstrip("/")).resolve()
    if not str(target).startswith(str(static_dir.resolve())) or not target.is_file():
        return Response(404, "Not Found", Headers({"Content-Type": "text/plain"}), b"not found")
    body = target.read_bytes()
    ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
    return Response(200, "OK", Headers({"Content-Type": ctype, "Content-Length": str(len(body))}), body)


def resolve_port(port: int | None) -> int:
    if port is not None:
        return port
    env = os.environ.get(PORT_ENV_VAR)
    return int(env) if env else DEFAULT_PORT


async def serve_async(
    pair: ArmPair,
    host: str = "127.0.0.1",
    port: int | None = None,
    params: FilterParams | None = None,
    static_dir: str | Path | None = None,
    ready: asyncio.Event | None = None,
    stop: asyncio.Event | None = None,
) -> None:
    from websockets.asyncio.server import serve as ws_serve

    port = resolve_port(port)
    static = Path(static_dir) if static_dir else None

    async def handler(connection) -> None:
        state = SessionState.create(pair, params=dataclasses.replace(params) if params else None)
        await connection.send(json.dumps(hello_message(state)))
        async for raw in connection:
            reply = handle_message(state, raw)
            await connection.send(json.dumps(reply))

    def process_request(connection, request):
        if "Upgrade" in request.headers.get("Connection", "") or request.headers.get(
            "Upgrade", ""
        ):
            return None
        if static is not None:
            return _static_response(static, request.path)
        return None

    # Human-rate JSON frames: frame compression costs more latency than it
    # saves on localhost.
    async with ws_serve(
        handler, host, port, process_request=process_request, compression=None
    ):
        if ready is not None:
            ready.set()
        if stop is not None:
            await stop.wait()
        else:
            await asyncio.Future()


def serve(
    pair: ArmPair,
    host: str = "127.0.0.1",
    port: int | None = None,
    params: FilterParams | None = None,
    static_dir: str | Path | None = None,
) -> None:
    actual = resolve_port(port)
    print(f"sandbox service listening on ws://{host}:{actual}")
    if static_dir:
        print(f"serving UI assets from {static_dir} at http://{host}:{actual}/")
    try:
        asyncio.run(
            serve_async(pair, host=host, port=actual, params=params, static_dir=static_dir)
        )
    except KeyboardInterrupt:
        pass
