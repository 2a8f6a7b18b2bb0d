// WebSocket client with reconnect. Parsing failures are logged and skipped;
// the view only ever sees validated messages.

import { parseServerMessage, ServerMessage } from "./protocol.js";

export function defaultServerUrl(): string {
  const loc = window.location;
  const proto = loc.protocol === "https:" ? "wss:" : "ws:";
  return `${proto}//${loc.host}/ws`;
}

export class SocketClient {
  private ws: WebSocket | null = null;
  private retryMs = 500;
  private closedByUser = false;

  constructor(
    readonly url: string,
    private onMessage: (msg: ServerMessage) => void,
    private onStateChange: (open: boolean) => void,
  ) {}

  connect(): void {
    this.closedByUser = false;
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.retryMs = 500;
      this.onStateChange(true);
    };
    ws.onmessage = (event) => {
      try {
        this.onMessage(parseServerMessage(String(event.data)));
      } catch (err) {
        console.warn("skipping malformed server message:", err);
      }
    };
    ws.onclose = () => {
      this.onStateChange(false);
      if (!this.closedByUser) {
        setTimeout(() => this.connect(), this.retryMs);
        this.retryMs = Math.min(this.retryMs * 2, 5000);
      }
    };
    ws.onerror = () => ws.close();
  }

  get open(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }

  send(payload: string): void {
    if (this.open) this.ws!.send(payload);
  }

  close(): void {
    this.closedByUser = true;
    this.ws?.close();
  }
}
