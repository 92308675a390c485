/**
 * Client-side state store. The draggable markers are the user's intent and
 * move optimistically; everything rendered about the robot (skeleton,
 * capsules, distances, flags) comes verbatim from the most recent service
 * state message. No kinematics happen on the client.
 */
import {
  AckMessage,
  ArmUpdate,
  CapsuleState,
  ErrorMessage,
  HelloMessage,
  Quat,
  ServerMessage,
  StateMessage,
  UpdateMessage,
  Vec3,
} from "./protocol";

export type { Quat, Vec3 } from "./protocol";

export type Side = "left" | "right";
export type MarkerName = "s" | "e" | "w";
export type DistanceBand = "safe" | "near" | "violated";

export interface ArmMarkers {
  s: Vec3;
  e: Vec3;
  w: Vec3;
  hand: Quat;
}

const DEFAULT_MARKERS: Record<Side, ArmMarkers> = {
  left: {
    s: [0.0, 0.22, 0.0],
    e: [0.18, 0.26, -0.2],
    w: [0.42, 0.24, -0.14],
    hand: [0.0, -0.38268343, 0.0, 0.92387953], // pointing tilted forward-down
  },
  right: {
    s: [0.0, -0.22, 0.0],
    e: [0.18, -0.26, -0.2],
    w: [0.42, -0.24, -0.14],
    hand: [0.0, -0.38268343, 0.0, 0.92387953],
  },
};

export interface HudSnapshot {
  connected: boolean;
  filterOn: boolean;
  filterPending: boolean;
  filterActive: boolean;
  held: boolean;
  solveMs: number | null;
  filterMs: number | null;
  minDistance: number | null;
  flags: string[];
  frame: number | null;
}

export class SceneModel {
  markers: Record<Side, ArmMarkers> = {
    left: structuredClone(DEFAULT_MARKERS.left),
    right: structuredClone(DEFAULT_MARKERS.right),
  };
  torso: Vec3 = [0.0, 0.0, -0.5];

  connected = false;
  lastState: StateMessage | null = null;
  hello: HelloMessage | null = null;
  lastError: ErrorMessage | null = null;

  /** Activation distance used as the "near" band boundary. */
  nearBandDistance = 0.02;

  private filterConfirmed = true;
  private pendingConfigs = new Map<number, boolean>();

  // --- marker intent ----------------------------------------------------------

  setMarker(side: Side, name: MarkerName, position: Vec3): void {
    this.markers[side][name] = [position[0], position[1], position[2]];
  }

  setHand(side: Side, quat: Quat): void {
    const n = Math.hypot(quat[0], quat[1], quat[2], quat[3]) || 1;
    this.markers[side].hand = [quat[0] / n, quat[1] / n, quat[2] / n, quat[3] / n];
  }

  buildUpdate(seq: number): UpdateMessage {
    const arm = (side: Side): ArmUpdate => ({
      s: [...this.markers[side].s],
      e: [...this.markers[side].e],
      w: [...this.markers[side].w],
      hand_quat: [...this.markers[side].hand],
    });
    return {
      type: "update",
      seq,
      torso: [...this.torso],
      shoulder_left: [...this.markers.left.s],
      shoulder_right: [...this.markers.right.s],
      left: arm("left"),
      right: arm("right"),
    };
  }

  // --- server messages ---------------------------------------------------------

  applyServer(msg: ServerMessage): void {
    switch (msg.type) {
      case "hello":
        this.hello = msg;
        this.filterConfirmed = msg.filter;
        this.pendingConfigs.clear();
        const act = (msg.params as { d_act?: unknown }).d_act;
        if (typeof act === "number") this.nearBandDistance = act;
        break;
      case "state":
        this.lastState = msg;
        break;
      case "ack":
        this.applyAck(msg);
        break;
      case "error":
        this.lastError = msg;
        if (typeof msg.seq === "number") this.pendingConfigs.delete(msg.seq);
        break;
    }
  }

  private applyAck(msg: AckMessage): void {
    this.filterConfirmed = msg.filter;
    if (typeof msg.seq === "number") this.pendingConfigs.delete(msg.seq);
    const act = (msg.params as { d_act?: unknown }).d_act;
    if (typeof act === "number") this.nearBandDistance = act;
  }

  noteConfigSent(seq: number, filter: boolean): void {
    this.pendingConfigs.set(seq, filter);
  }

  setConnected(connected: boolean): void {
    this.connected = connected;
    if (!connected) this.pendingConfigs.clear();
  }

  /** Displayed toggle state: newest pending request, else last acknowledged. */
  filterDisplayed(): boolean {
    let value = this.filterConfirmed;
    let newest = -Infinity;
    for (const [seq, desired] of this.pendingConfigs) {
      if (seq > newest) {
        newest = seq;
        value = desired;
      }
    }
    return value;
  }

  filterIsPending(): boolean {
    return this.pendingConfigs.size > 0;
  }

  // --- derived rendering data ---------------------------------------------------

  capsules(): CapsuleState[] {
    return this.lastState?.capsules ?? [];
  }

  minDistanceOf(tag: string): number | null {
    if (!this.lastState) return null;
    let best: number | null = null;
    for (const [a, b, d] of this.lastState.pair_distances) {
      if (a === tag || b === tag) {
        best = best === null ? d : Math.min(best, d);
      }
    }
    return best;
  }

  bandOf(distance: number | null): DistanceBand {
    if (distance === null) return "safe";
    if (distance < 0) return "violated";
    if (distance < this.nearBandDistance) return "near";
    return "safe";
  }

  capsuleBand(tag: string): DistanceBand {
    return this.bandOf(this.minDistanceOf(tag));
  }

  anyViolated(): boolean {
    return this.lastState !== null && this.lastState.min_distance < 0;
  }

  hud(): HudSnapshot {
    const state = this.lastState;
    const flags: string[] = [];
    if (state) {
      for (const side of ["left", "right"] as const) {
        const f = state[side].flags;
        if (!f) continue;
        for (const stage of f.clamped) flags.push(`clamped:${side}:${stage}`);
        for (const stage of f.degenerate) flags.push(`degenerate:${side}:${stage}`);
        if (f.gimbal) flags.push(`gimbal:${side}`);
      }
      if (state.held) flags.push("held");
    }
    return {
      connected: this.connected,
      filterOn: this.filterDisplayed(),
      filterPending: this.filterIsPending(),
      filterActive: state?.filter_active ?? false,
      held: state?.held ?? false,
      solveMs: state?.solve_ms ?? null,
      filterMs: state?.filter_ms ?? null,
      minDistance: state?.min_distance ?? null,
      flags,
    frame: state?.frame ?? null,
    };
  }
}
