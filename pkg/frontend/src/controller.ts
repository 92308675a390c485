/**
 * Glue between marker input, the state model, and the service connection:
 * drags update the model and enqueue a throttled keypoint update; config
 * changes are acknowledged (or reverted on rejection) by the model.
 */
import { Connection } from "./connection";
import { MarkerName, Quat, SceneModel, Side, Vec3 } from "./model";
import { ServerMessage, UpdateMessage } from "./protocol";
import { UpdateThrottle } from "./throttle";

export class SandboxController {
  readonly model: SceneModel;
  private seq = 0;
  private readonly throttle: UpdateThrottle<UpdateMessage>;
  private listeners: ((msg: ServerMessage) => void)[] = [];
  sentUpdates = 0;

  constructor(
    private readonly connection: Connection,
    model?: SceneModel,
    maxHz = 60,
    now?: () => number,
  ) {
    this.model = model ?? new SceneModel();
    this.throttle = new UpdateThrottle<UpdateMessage>(
      (payload) => {
        if (this.connection.send(payload)) this.sentUpdates += 1;
      },
      maxHz,
      now,
    );
  }

  /** Wire into a Connection's events (call before connect()). */
  events() {
    return {
      onOpen: () => this.model.setConnected(true),
      onClose: () => this.model.setConnected(false),
      onMessage: (msg: ServerMessage) => {
        this.model.applyServer(msg);
        for (const listener of this.listeners) listener(msg);
      },
    };
  }

  onMessage(listener: (msg: ServerMessage) => void): void {
    this.listeners.push(listener);
  }

  /** Optimistic marker motion plus a throttled update to the service. */
  dragMarker(side: Side, name: MarkerName, position: Vec3): void {
    if (!this.model.connected) return;
    this.model.setMarker(side, name, position);
    this.pushUpdate();
  }

  rotateHand(side: Side, quat: Quat): void {
    if (!this.model.connected) return;
    this.model.setHand(side, quat);
    this.pushUpdate();
  }

  /** Send the current marker state immediately through the throttle. */
  pushUpdate(): void {
    this.seq += 1;
    this.throttle.push(this.model.buildUpdate(this.seq));
  }

  toggleFilter(desired: boolean): void {
    if (!this.model.connected) return;
    this.seq += 1;
    this.model.noteConfigSent(this.seq, desired);
    this.connection.send({ type: "config", seq: this.seq, filter: desired });
  }

  resetPose(): void {
    if (!this.model.connected) return;
    this.seq += 1;
    this.connection.send({ type: "config", seq: this.seq, reset: true });
  }

  dispose(): void {
    this.throttle.dispose();
  }
}
