/**
 * End-to-end sandbox checks against a real service instance: scripted drag
 * sequences drive the client exactly like pointer input would, and every
 * assertion below reads only what the UI itself would render.
 */
import { ChildProcess, spawn } from "node:child_process";
import { createServer } from "node:net";
import path from "node:path";
import { performance } from "node:perf_hooks";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { Connection, SocketLike } from "../src/connection";
import { SandboxController } from "../src/controller";
import { ServerMessage, StateMessage, Vec3 } from "../src/protocol";

const REPO_ROOT = path.resolve(process.cwd(), "..");

let service: ChildProcess;
let port: number;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = createServer();
    srv.listen(0, "127.0.0.1", () => {
      const address = srv.address();
      if (typeof address === "object" && address) {
        const p = address.port;
        srv.close(() => resolve(p));
      } else {
        reject(new Error("no port"));
      }
    });
  });
}

interface Client {
  controller: SandboxController;
  connection: Connection;
  raw: string[];
  nextReply(): Promise<ServerMessage>;
  nextState(): Promise<StateMessage>;
  close(): void;
}

async function openClient(maxHz = 60): Promise<Client> {
  const raw: string[] = [];
  const queue: ServerMessage[] = [];
  const waiters: ((msg: ServerMessage) => void)[] = [];
  let controller: SandboxController;
  const connection = new Connection(
    `ws://127.0.0.1:${port}/`,
    (url) => {
      const socket = new WebSocket(url);
      socket.addEventListener("message", (ev) => raw.push(String(ev.data)));
      return socket as unknown as SocketLike;
    },
    {
      onOpen: () => controller.model.setConnected(true),
      onClose: () => controller.model.setConnected(false),
      onMessage: (msg) => {
        controller.model.applyServer(msg);
        const waiter = waiters.shift();
        if (waiter) waiter(msg);
        else queue.push(msg);
      },
    },
  );
  controller = new SandboxController(connection, undefined, maxHz, () => performance.now());
  connection.connect();

  const client: Client = {
    controller,
    connection,
    raw,
    nextReply: () =>
      new Promise((resolve) => {
        const msg = queue.shift();
        if (msg) resolve(msg);
        else waiters.push(resolve);
      }),
    nextState: async () => {
      for (;;) {
        const msg = await client.nextReply();
        if (msg.type === "state") return msg;
      }
    },
    close: () => {
      controller.dispose();
      connection.close();
    },
  };
  const hello = await client.nextReply();
  expect(hello.type).toBe("hello");
  return client;
}

function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

function norm(v: Vec3): number {
  return Math.hypot(v[0], v[1], v[2]);
}

function normalize(v: Vec3): Vec3 {
  const n = norm(v);
  return [v[0] / n, v[1] / n, v[2] / n];
}

function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

beforeAll(async () => {
  port = await freePort();
  service = spawn("python3", ["-m", "sewarm.cli", "serve", "--port", String(port)], {
    cwd: REPO_ROOT,
    stdio: ["ignore", "pipe", "pipe"],
  });
  // Wait for the endpoint to accept connections.
  const deadline = Date.now() + 20000;
  for (;;) {
    try {
      await new Promise<void>((resolve, reject) => {
        const probe = new WebSocket(`ws://127.0.0.1:${port}/`);
        probe.once("open", () => {
          probe.close();
          resolve();
        });
        probe.once("error", reject);
      });
      break;
    } catch {
      if (Date.now() > deadline) throw new Error("service did not start");
      await new Promise((r) => setTimeout(r, 200));
    }
  }
});

afterAll(() => {
  service?.kill();
});

describe("sandbox end to end", () => {
  it("renders exactly what the service replies (no client kinematics)", async () => {
    const client = await openClient();
    try {
      client.controller.pushUpdate();
      const state = await client.nextState();
      // The model's rendering source is the reply object itself...
      expect(client.controller.model.lastState).toBe(state);
      // ...and the reply object matches the raw wire bytes field for field.
      const wire = JSON.parse(client.raw[client.raw.length - 1]) as StateMessage;
      expect(state.left.q).toEqual(wire.left.q);
      expect(state.right.q).toEqual(wire.right.q);
      expect(state.capsules).toEqual(wire.capsules);
      expect(state.min_distance).toEqual(wire.min_distance);
    } finally {
      client.close();
    }
  });

  it("full-extension reach stays stable and points along the drag direction", async () => {
    const client = await openClient(1000);
    try {
      const dir = normalize([0.9, -0.25, 0.05]);
      const model = client.controller.model;
      const shoulder = model.markers.right.s;
      let last: StateMessage | null = null;
      for (let step = 1; step <= 25; step += 1) {
        const t = step / 25;
        const reach = 0.35 + t * 1.45; // ends far beyond the arm's ~0.7 m
        // The elbow droops below the reach ray while bent and straightens
        // onto it as the wrist is dragged out, like a human extending.
        const droop = 0.3 * Math.max(0, 1 - reach / 0.57);
        const elbowDir = normalize([dir[0], dir[1], dir[2] - droop]);
        const elbow: Vec3 = [
          shoulder[0] + 0.3 * elbowDir[0],
          shoulder[1] + 0.3 * elbowDir[1],
          shoulder[2] + 0.3 * elbowDir[2],
        ];
        const wrist: Vec3 = [
          shoulder[0] + reach * dir[0],
          shoulder[1] + reach * dir[1],
          shoulder[2] + reach * dir[2],
        ];
        // Scripted steps set markers atomically and push once, so each
        // awaited reply corresponds to this step's full marker state.
        model.setMarker("right", "e", elbow);
        model.setMarker("right", "w", wrist);
        client.controller.pushUpdate();
        const state = await client.nextState();
        for (const value of [...state.right.q, ...state.right.w, ...state.right.t]) {
          expect(Number.isFinite(value)).toBe(true);
        }
        if (last) {
          // No instability: the rendered skeleton moves smoothly even at and
          // beyond full extension (joint q3 may swing freely there; that is
          // the arm's self-rotation null direction, invisible in task space).
          for (const key of ["e", "w", "t"] as const) {
            const jump = norm(sub(state.right[key], last.right[key]));
            expect(jump).toBeLessThan(0.12);
          }
        }
        last = state;
      }
      const arm = last!.right;
      const span = norm(sub(arm.w, arm.s));
      const upper = norm(sub(arm.e, arm.s));
      const lower = norm(sub(arm.w, arm.e));
      expect(span).toBeCloseTo(upper + lower, 5); // fully extended chain
      const robotDir = normalize(sub(arm.w, arm.e));
      expect(dot(robotDir, dir)).toBeGreaterThan(0.999999);
    } finally {
      client.close();
    }
  });

  function crossingScript(client: Client, step: number, steps: number): void {
    // Both wrists sweep across the body midline through each other's path.
    const a = step / steps;
    const y = 0.35 - 0.7 * a;
    const model = client.controller.model;
    model.setMarker("left", "w", [0.4, -y, -0.1]);
    model.setMarker("left", "e", [0.2, 0.18 - 0.25 * a, -0.25]);
    model.setMarker("right", "w", [0.38, y, -0.12]);
    model.setMarker("right", "e", [0.2, -0.18 + 0.25 * a, -0.25]);
    client.controller.pushUpdate();
  }

  it("capsules never render violated while crossing with the filter on", async () => {
    const client = await openClient(1000);
    try {
      expect(client.controller.model.filterDisplayed()).toBe(true);
      const steps = 40;
      let filterEngaged = false;
      for (let step = 0; step <= steps; step += 1) {
        crossingScript(client, step, steps);
        const state = await client.nextState();
        filterEngaged = filterEngaged || state.filter_active;
        expect(state.min_distance).toBeGreaterThanOrEqual(0);
        for (const capsule of state.capsules) {
          expect(client.controller.model.capsuleBand(capsule.tag)).not.toBe("violated");
        }
      }
      expect(filterEngaged).toBe(true); // the script does provoke the filter
    } finally {
      client.close();
    }
  });

  it("the same crossing violates without the filter (contrast)", async () => {
    const client = await openClient(1000);
    try {
      client.controller.toggleFilter(false);
      const ack = await client.nextReply();
      expect(ack.type).toBe("ack");
      const steps = 40;
      let violated = 0;
      for (let step = 0; step <= steps; step += 1) {
        crossingScript(client, step, steps);
        const state = await client.nextState();
        if (state.min_distance < 0) violated += 1;
      }
      expect(violated).toBeGreaterThan(0);
    } finally {
      client.close();
    }
  });

  it("continuous drag stays at or below 60 updates per second", async () => {
    const client = await openClient(60);
    try {
      const t0 = performance.now();
      let moved = 0;
      while (performance.now() - t0 < 1000) {
        const a = (performance.now() - t0) / 1000;
        client.controller.dragMarker("right", "w", [0.4, -0.2 + 0.1 * Math.sin(a * 6), -0.1]);
        moved += 1;
        await new Promise((r) => setImmediate(r));
      }
      const elapsed = (performance.now() - t0) / 1000;
      expect(moved).toBeGreaterThan(500); // input really was continuous
      expect(client.controller.sentUpdates / elapsed).toBeLessThanOrEqual(61);
      // Drain replies.
      for (let i = 0; i < client.controller.sentUpdates; i += 1) await client.nextReply();
    } finally {
      client.close();
    }
  });

  it("no drag sends no messages", async () => {
    const client = await openClient();
    try {
      await new Promise((r) => setTimeout(r, 300));
      expect(client.controller.sentUpdates).toBe(0);
    } finally {
      client.close();
    }
  });

  it("round-trip overhead beyond solve time stays under 2 ms", async () => {
    const client = await openClient(1000);
    try {
      const overheads: number[] = [];
      for (let i = 0; i < 120; i += 1) {
        const t0 = performance.now();
        client.controller.pushUpdate();
        const state = await client.nextState();
        const wall = performance.now() - t0;
        if (i >= 20) overheads.push(wall - state.solve_ms - state.filter_ms);
        await new Promise((r) => setTimeout(r, 1000 / 60));
      }
      overheads.sort((a, b) => a - b);
      const median = overheads[Math.floor(overheads.length / 2)];
      expect(median).toBeLessThan(2.0);
    } finally {
      client.close();
    }
  });

  it("rapid double toggle settles on the last ack", async () => {
    const client = await openClient();
    try {
      client.controller.toggleFilter(false);
      client.controller.toggleFilter(true);
      const ack1 = await client.nextReply();
      const ack2 = await client.nextReply();
      expect(ack1.type).toBe("ack");
      expect(ack2.type).toBe("ack");
      expect(client.controller.model.filterDisplayed()).toBe(true);
      expect(client.controller.model.filterIsPending()).toBe(false);
    } finally {
      client.close();
    }
  });

  it("rejected config reverts the toggle", async () => {
    const client = await openClient();
    try {
      client.connection.send({ type: "config", seq: 999, params: { nope: 1 } });
      client.controller.model.noteConfigSent(999, false);
      const reply = await client.nextReply();
      expect(reply.type).toBe("error");
      expect(client.controller.model.filterDisplayed()).toBe(true);
    } finally {
      client.close();
    }
  });
});
