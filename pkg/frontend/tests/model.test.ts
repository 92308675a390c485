import { describe, expect, it } from "vitest";

import { SceneModel } from "../src/model";
import { AckMessage, ErrorMessage, HelloMessage, StateMessage } from "../src/protocol";

function stateMessage(overrides: Partial<StateMessage> = {}): StateMessage {
  const arm = {
    q: [0, 0, 0, 0, 0, 0, 0],
    s: [0, -0.22, 0] as [number, number, number],
    e: [0, -0.22, -0.3] as [number, number, number],
    w: [0, -0.22, -0.57] as [number, number, number],
    t: [0, -0.22, -0.69] as [number, number, number],
    tool_quat: [0, 0, 0, 1] as [number, number, number, number],
    flags: { clamped: [], degenerate: [], gimbal: false },
  };
  return {
    type: "state",
    seq: 1,
    frame: 0,
    solve_ms: 0.5,
    filter_ms: 1.0,
    filter_on: true,
    filter_active: false,
    held: false,
    left: { ...arm, s: [0, 0.22, 0] },
    right: arm,
    capsules: [
      { tag: "hand_lt", p1: [0, 0.2, -0.6], p2: [0, 0.2, -0.7], r: 0.07 },
      { tag: "hand_rt", p1: [0, -0.2, -0.6], p2: [0, -0.2, -0.7], r: 0.07 },
    ],
    pair_distances: [["hand_lt", "hand_rt", 0.05]],
    min_distance: 0.05,
    ...overrides,
  };
}

const hello: HelloMessage = {
  type: "hello",
  version: 1,
  models: { left: "l", right: "r" },
  filter: true,
  params: { d_act: 0.02 },
};

describe("SceneModel", () => {
  it("stores the latest state verbatim as the rendering source", () => {
    const model = new SceneModel();
    const msg = stateMessage();
    model.applyServer(msg);
    // The skeleton the renderer reads is exactly the reply object.
    expect(model.lastState).toBe(msg);
    expect(model.capsules()).toBe(msg.capsules);
  });

  it("computes distance bands from pair distances", () => {
    const model = new SceneModel();
    model.applyServer(hello);
    model.applyServer(stateMessage({ pair_distances: [["hand_lt", "hand_rt", 0.05]] }));
    expect(model.capsuleBand("hand_lt")).toBe("safe");
    model.applyServer(stateMessage({ pair_distances: [["hand_lt", "hand_rt", 0.015]] }));
    expect(model.capsuleBand("hand_lt")).toBe("near");
    model.applyServer(
      stateMessage({ pair_distances: [["hand_lt", "hand_rt", -0.01]], min_distance: -0.01 }),
    );
    expect(model.capsuleBand("hand_rt")).toBe("violated");
    expect(model.anyViolated()).toBe(true);
    // A capsule with no active pairs renders safe.
    expect(model.capsuleBand("torso")).toBe("safe");
  });

  it("builds updates from the current marker intent", () => {
    const model = new SceneModel();
    model.setMarker("right", "w", [0.5, -0.1, 0.0]);
    const update = model.buildUpdate(9);
    expect(update.seq).toBe(9);
    expect(update.right.w).toEqual([0.5, -0.1, 0.0]);
    expect(update.shoulder_left).toEqual(model.markers.left.s);
  });

  it("normalizes hand quaternions", () => {
    const model = new SceneModel();
    model.setHand("left", [0, 0, 0, 2]);
    expect(model.markers.left.hand).toEqual([0, 0, 0, 1]);
  });

  describe("filter toggle", () => {
    it("reflects the acknowledged state", () => {
      const model = new SceneModel();
      model.applyServer(hello);
      expect(model.filterDisplayed()).toBe(true);
      model.noteConfigSent(5, false);
      expect(model.filterDisplayed()).toBe(false);
      expect(model.filterIsPending()).toBe(true);
      const ack: AckMessage = { type: "ack", seq: 5, filter: false, params: {} };
      model.applyServer(ack);
      expect(model.filterDisplayed()).toBe(false);
      expect(model.filterIsPending()).toBe(false);
    });

    it("reverts on rejection", () => {
      const model = new SceneModel();
      model.applyServer(hello);
      model.noteConfigSent(5, false);
      const nack: ErrorMessage = { type: "error", seq: 5, message: "nope" };
      model.applyServer(nack);
      expect(model.filterDisplayed()).toBe(true);
      expect(model.filterIsPending()).toBe(false);
    });

    it("rapid double toggle lands on the last ack", () => {
      const model = new SceneModel();
      model.applyServer(hello);
      model.noteConfigSent(5, false);
      model.noteConfigSent(6, true);
      expect(model.filterDisplayed()).toBe(true); // newest pending
      model.applyServer({ type: "ack", seq: 5, filter: false, params: {} });
      expect(model.filterDisplayed()).toBe(true); // seq 6 still pending
      model.applyServer({ type: "ack", seq: 6, filter: true, params: {} });
      expect(model.filterDisplayed()).toBe(true);
      expect(model.filterIsPending()).toBe(false);
    });
  });

  it("hud snapshot surfaces engine flags", () => {
    const model = new SceneModel();
    model.setConnected(true);
    const msg = stateMessage();
    msg.right.flags = { clamped: ["wrist"], degenerate: [], gimbal: true };
    model.applyServer(msg);
    const hud = model.hud();
    expect(hud.connected).toBe(true);
    expect(hud.flags).toContain("clamped:right:wrist");
    expect(hud.flags).toContain("gimbal:right");
    expect(hud.solveMs).toBe(0.5);
  });
});
