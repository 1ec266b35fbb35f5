// Reconnecting WebSocket wrapper for the /ws endpoint.
//
// Auto-reconnects with exponential backoff capped at 5 s. While the
// socket is closed, at most one outgoing action is queued; further
// actions are dropped until the connection returns.

import type { ClientFrame } from "./protocol.js";

const BACKOFF_BASE_MS = 500;
const BACKOFF_CAP_MS = 5000;
const OPEN_STATE = 1; // WebSocket.OPEN, identical for browser and ws package

/** Structural subset shared by the browser WebSocket and the ws package. */
export interface SocketLike {
  readyState: number;
  send(data: string): void;
  close(): void;
  onopen: ((event?: unknown) => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: ((event?: unknown) => void) | null;
  onerror: ((event?: unknown) => void) | null;
}

export interface GameSocketOptions {
  url: string;
  onMessage: (raw: string) => void;
  onStatus: (status: "connecting" | "live" | "reconnecting") => void;
  // injectable for tests and for Node clients
  socketFactory?: (url: string) => SocketLike;
}

export class GameSocket {
  private ws: SocketLike | null = null;
  private attempt = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private closed = false;
  private pending: ClientFrame | null = null;

  constructor(private options: GameSocketOptions) {}

  connect(): void {
    this.closed = false;
    this.options.onStatus(this.attempt === 0 ? "connecting" : "reconnecting");
    const factory =
      this.options.socketFactory ??
      ((url: string) => new WebSocket(url) as unknown as SocketLike);
    const ws = factory(this.options.url);
    this.ws = ws;

    ws.onopen = () => {
      this.attempt = 0;
      this.options.onStatus("live");
      if (this.pending) {
        const frame = this.pending;
        this.pending = null;
        this.send(frame);
      }
    };
    ws.onmessage = (event) => this.options.onMessage(String(event.data));
    ws.onclose = () => {
      this.ws = null;
      if (!this.closed) this.scheduleReconnect();
    };
    ws.onerror = () => {
      // onclose follows; reconnect handled there
    };
  }

  /** Send one frame, or queue it (depth 1) while disconnected. */
  send(frame: ClientFrame): boolean {
    if (this.ws && this.ws.readyState === OPEN_STATE) {
      this.ws.send(JSON.stringify(frame));
      return true;
    }
    if (this.pending === null) {
      this.pending = frame;
    }
    return false;
  }

  close(): void {
    this.closed = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.ws?.close();
    this.ws = null;
  }

  backoffDelay(): number {
    return Math.min(BACKOFF_BASE_MS * 2 ** this.attempt, BACKOFF_CAP_MS);
  }

  private scheduleReconnect(): void {
    this.options.onStatus("reconnecting");
    const delay = this.backoffDelay();
    this.attempt += 1;
    this.timer = setTimeout(() => {
      this.timer = null;
      this.connect();
    }, delay);
  }
}
