/**
 * Latest-wins rate limiter for keypoint updates: at most `maxHz` sends per
 * second, always eventually flushing the newest pending payload. No input,
 * no output: an idle throttle sends nothing.
 */
export class UpdateThrottle<T> {
  private readonly minIntervalMs: number;
  private lastSend = -Infinity;
  private pending: T | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly send: (payload: T) => void,
    maxHz = 60,
    private readonly now: () => number = () => performance.now(),
    private readonly schedule: (fn: () => void, ms: number) => ReturnType<typeof setTimeout> = (
      fn,
      ms,
    ) => setTimeout(fn, ms),
    private readonly cancel: (t: ReturnType<typeof setTimeout>) => void = clearTimeout,
  ) {
    this.minIntervalMs = 1000 / maxHz;
  }

  push(payload: T): void {
    const elapsed = this.now() - this.lastSend;
    if (elapsed >= this.minIntervalMs) {
      this.flushNow(payload);
      return;
    }
    this.pending = payload;
    if (this.timer === null) {
      this.timer = this.schedule(() => {
        this.timer = null;
        if (this.pending !== null) {
          const next = this.pending;
          this.pending = null;
          this.flushNow(next);
        }
      }, this.minIntervalMs - elapsed);
    }
  }

  private flushNow(payload: T): void {
    this.lastSend = this.now();
    this.send(payload);
  }

  dispose(): void {
    if (this.timer !== null) {
      this.cancel(this.timer);
      this.timer = null;
    }
    this.pending = null;
  }
}
