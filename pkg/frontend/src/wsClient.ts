/**
 * WebSocket transport with reconnect. On connection loss gaze emission must
 * stop (nothing is buffered: stale samples are worthless) and the UI shows a
 * reconnect banner until the session line is back.
 */

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface WsClientEvents {
  onMessage: (text: string) => void;
  onStatus: (status: "connecting" | "open" | "reconnecting" | "closed") => void;
}

export class WsClient {
  private socket: SocketLike | null = null;
  private shouldRun = false;
  private attempts = 0;
  readonly maxAttempts = 8;

  constructor(
    private url: string,
    private events: WsClientEvents,
    private factory: SocketFactory,
    private schedule: (fn: () => void, ms: number) => void =
      (fn, ms) => { setTimeout(fn, ms); },
  ) {}

  get connected(): boolean {
    return this.socket !== null && this.attempts === 0;
  }

  connect(): void {
    this.shouldRun = true;
    this.open();
  }

  /** Sends one protocol line; returns false (and drops it) when offline. */
  send(text: string): boolean {
    if (!this.connected || this.socket === null) {
      return false;
    }
    this.socket.send(text);
    return true;
  }

  close(): void {
    this.shouldRun = false;
    this.socket?.close();
    this.socket = null;
    this.events.onStatus("closed");
  }

  private open(): void {
    this.events.onStatus(this.attempts === 0 ? "connecting" : "reconnecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.attempts = 0;
      this.events.onStatus("open");
    };
    socket.onmessage = (event) => this.events.onMessage(event.data);
    socket.onclose = () => {
      this.socket = null;
      if (!this.shouldRun) return;
      this.attempts += 1;
      if (this.attempts > this.maxAttempts) {
        this.events.onStatus("closed");
        return;
      }
      this.events.onStatus("reconnecting");
      const backoff = Math.min(5000, 250 * 2 ** (this.attempts - 1));
      this.schedule(() => {
        if (this.shouldRun) this.open();
      }, backoff);
    };
    socket.onerror = () => {
      // close follows; handled there
    };
  }
}
