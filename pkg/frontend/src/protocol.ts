/**
 * Wire protocol of the sandbox service (version 1, see docs/protocol.md).
 * Positions are meters in the body-centric frame; orientations are unit
 * quaternions [x, y, z, w].
 */

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number];

export interface ArmUpdate {
  s: Vec3;
  e: Vec3;
  w: Vec3;
  hand_quat: Quat;
}

export interface UpdateMessage {
  type: "update";
  seq: number;
  torso?: Vec3;
  shoulder_left?: Vec3;
  shoulder_right?: Vec3;
  left: ArmUpdate;
  right: ArmUpdate;
}

export interface ConfigMessage {
  type: "config";
  seq: number;
  filter?: boolean;
  params?: Record<string, unknown>;
  reset?: boolean;
}

export interface ArmFlags {
  clamped: string[];
  degenerate: string[];
  gimbal: boolean;
}

export interface ArmState {
  q: number[];
  s: Vec3;
  e: Vec3;
  w: Vec3;
  t: Vec3;
  tool_quat: Quat;
  costs?: { upper: number; lower: number; wrist: number };
  flags?: ArmFlags;
}

export interface CapsuleState {
  tag: string;
  p1: Vec3;
  p2: Vec3;
  r: number;
}

export interface StateMessage {
  type: "state";
  seq: number | null;
  frame: number;
  solve_ms: number;
  filter_ms: number;
  filter_on: boolean;
  filter_active: boolean;
  held: boolean;
  left: ArmState;
  right: ArmState;
  capsules: CapsuleState[];
  pair_distances: [string, string, number][];
  min_distance: number;
}

export interface HelloMessage {
  type: "hello";
  version: number;
  models: { left: string; right: string };
  filter: boolean;
  params: Record<string, unknown>;
}

export interface AckMessage {
  type: "ack";
  seq: number | null;
  filter: boolean;
  params: Record<string, unknown>;
}

export interface ErrorMessage {
  type: "error";
  seq?: number | null;
  message: string;
}

export type ServerMessage = HelloMessage | StateMessage | AckMessage | ErrorMessage;

export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const type = (data as { type?: unknown }).type;
  if (type === "hello" || type === "state" || type === "ack" || type === "error") {
    return data as ServerMessage;
  }
  return null;
}

export function isState(msg: ServerMessage): msg is StateMessage {
  return msg.type === "state";
}
