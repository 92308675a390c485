import { describe, expect, it } from "vitest";

import { UpdateThrottle } from "../src/throttle";

/** Deterministic clock + scheduler so rate limiting is testable exactly. */
class FakeTime {
  nowMs = 0;
  private queue: { at: number; fn: () => void; id: number }[] = [];
  private counter = 0;

  now = () => this.nowMs;
  schedule = (fn: () => void, ms: number) => {
    const id = ++this.counter;
    this.queue.push({ at: this.nowMs + ms, fn, id });
    return id as unknown as ReturnType<typeof setTimeout>;
  };
  cancel = (t: ReturnType<typeof setTimeout>) => {
    this.queue = this.queue.filter((e) => e.id !== (t as unknown as number));
  };

  advance(ms: number): void {
    const target = this.nowMs + ms;
    for (;;) {
      this.queue.sort((a, b) => a.at - b.at);
      const next = this.queue[0];
      if (!next || next.at > target) break;
      this.nowMs = next.at;
      this.queue.shift();
      next.fn();
    }
    this.nowMs = target;
  }
}

describe("UpdateThrottle", () => {
  it("sends nothing when idle", () => {
    const time = new FakeTime();
    const sent: number[] = [];
    new UpdateThrottle<number>((p) => sent.push(p), 60, time.now, time.schedule, time.cancel);
    time.advance(1000);
    expect(sent).toEqual([]);
  });

  it("caps a continuous drag at 60 sends per second", () => {
    const time = new FakeTime();
    const sent: number[] = [];
    const throttle = new UpdateThrottle<number>(
      (p) => sent.push(p),
      60,
      time.now,
      time.schedule,
      time.cancel,
    );
    for (let i = 0; i < 1000; i += 1) {
      throttle.push(i);
      time.advance(1); // 1 kHz input for one second
    }
    expect(sent.length).toBeLessThanOrEqual(61);
    expect(sent.length).toBeGreaterThanOrEqual(59);
  });

  it("always flushes the newest payload", () => {
    const time = new FakeTime();
    const sent: number[] = [];
    const throttle = new UpdateThrottle<number>(
      (p) => sent.push(p),
      60,
      time.now,
      time.schedule,
      time.cancel,
    );
    throttle.push(1); // immediate
    throttle.push(2);
    throttle.push(3); // coalesces with 2; latest wins
    time.advance(100);
    expect(sent).toEqual([1, 3]);
  });

  it("single events pass through immediately", () => {
    const time = new FakeTime();
    const sent: number[] = [];
    const throttle = new UpdateThrottle<number>(
      (p) => sent.push(p),
      60,
      time.now,
      time.schedule,
      time.cancel,
    );
    throttle.push(1);
    time.advance(500);
    throttle.push(2);
    time.advance(500);
    expect(sent).toEqual([1, 2]);
  });
});
