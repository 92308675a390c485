/**
 * Thin WebSocket wrapper. Takes a socket factory so browser WebSocket and the
 * node `ws` client are interchangeable (the integration tests drive a real
 * service from node).
 */
import { parseServerMessage, ServerMessage } from "./protocol";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: "open", listener: () => void): void;
  addEventListener(type: "close", listener: () => void): void;
  addEventListener(type: "error", listener: (err: unknown) => void): void;
  addEventListener(type: "message", listener: (event: { data: unknown }) => void): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ConnectionEvents {
  onOpen?: () => void;
  onClose?: () => void;
  onMessage?: (msg: ServerMessage) => void;
}

export class Connection {
  private socket: SocketLike | null = null;
  private openFlag = false;

  constructor(
    private readonly url: string,
    private readonly factory: SocketFactory,
    private readonly events: ConnectionEvents = {},
  ) {}

  connect(): void {
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.addEventListener("open", () => {
      this.openFlag = true;
      this.events.onOpen?.();
    });
    socket.addEventListener("close", () => {
      this.openFlag = false;
      this.socket = null;
      this.events.onClose?.();
    });
    socket.addEventListener("error", () => {
      // The close event carries the state change; nothing extra to do.
    });
    socket.addEventListener("message", (event) => {
      const msg = parseServerMessage(String(event.data));
      if (msg) this.events.onMessage?.(msg);
    });
  }

  get open(): boolean {
    return this.openFlag;
  }

  send(payload: unknown): boolean {
    if (!this.socket || !this.openFlag) return false;
    this.socket.send(JSON.stringify(payload));
    return true;
  }

  close(): void {
    this.socket?.close();
  }
}
