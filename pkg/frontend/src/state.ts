// Client-side view of the session. Holds only server-provided state: a
// reconnect rebuilds everything from the next scene and frame.

import { Frame, Scene, ServerMessage, Status } from "./protocol.js";
import { Ring } from "./ring.js";

export const TRAIL_SECONDS = 5;
export const BETA_HISTORY = 300;

export type Connection = "connecting" | "open" | "closed";

export class ClientView {
  scene: Scene | null = null;
  frame: Frame | null = null;
  status: Status | null = null;
  trail = new Ring<number[]>(100);
  betaHistory = new Ring<number>(BETA_HISTORY);
  connection: Connection = "connecting";
  framesSeen = 0;

  apply(msg: ServerMessage): void {
    if (msg.type === "scene") {
      this.scene = msg;
      // trail length follows the server tick rate: last TRAIL_SECONDS of motion
      const ticks = Math.max(1, Math.round(TRAIL_SECONDS / msg.dt));
      this.trail = new Ring<number[]>(ticks);
      this.betaHistory.clear();
      this.frame = null;
      this.framesSeen = 0;
    } else if (msg.type === "frame") {
      this.frame = msg;
      this.trail.push(msg.state);
      this.betaHistory.push(msg.beta);
      this.framesSeen++;
    } else {
      this.status = msg;
    }
  }

  bundleVersion(): number {
    if (this.frame) return this.frame.bundle;
    if (this.status) return this.status.bundle;
    return 0;
  }

  mode(): string {
    return this.status?.mode ?? "unknown";
  }
}
