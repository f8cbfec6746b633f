import { describe, expect, it } from "vitest";

import { SocketLike, WsClient } from "../src/wsClient.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: (() => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;
  onmessage: ((event: { data: string }) => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.();
  }
}

function harness() {
  const sockets: FakeSocket[] = [];
  const statuses: string[] = [];
  const messages: string[] = [];
  const pending: (() => void)[] = [];
  const client = new WsClient(
    "ws://x/session",
    {
      onMessage: (text) => messages.push(text),
      onStatus: (status) => statuses.push(status),
    },
    () => {
      const socket = new FakeSocket();
      sockets.push(socket);
      return socket;
    },
    (fn) => pending.push(fn),
  );
  return { client, sockets, statuses, messages, pending };
}

describe("ws client", () => {
  it("connects and delivers messages", () => {
    const h = harness();
    h.client.connect();
    h.sockets[0].onopen!();
    expect(h.statuses).toEqual(["connecting", "open"]);
    h.sockets[0].onmessage!({ data: '{"type":"END"}' });
    expect(h.messages).toEqual(['{"type":"END"}']);
    expect(h.client.send("hello")).toBe(true);
    expect(h.sockets[0].sent).toEqual(["hello"]);
  });

  it("drops sends while offline instead of buffering", () => {
    const h = harness();
    h.client.connect();
    h.sockets[0].onopen!();
    h.sockets[0].onclose!();
    expect(h.client.send("stale")).toBe(false);
    // reconnect succeeds; the stale line was never queued
    h.pending.shift()!();
    h.sockets[1].onopen!();
    expect(h.sockets[1].sent).toEqual([]);
  });

  it("announces reconnecting and backs off", () => {
    const h = harness();
    h.client.connect();
    h.sockets[0].onopen!();
    h.sockets[0].onclose!();
    expect(h.statuses).toContain("reconnecting");
    h.pending.shift()!();
    h.sockets[1].onopen!();
    expect(h.statuses[h.statuses.length - 1]).toBe("open");
  });

  it("gives up after the attempt budget", () => {
    const h = harness();
    h.client.connect();
    for (let i = 0; i <= h.client.maxAttempts; i++) {
      h.sockets[h.sockets.length - 1].onclose!();
      const next = h.pending.shift();
      if (next) next();
    }
    expect(h.statuses[h.statuses.length - 1]).toBe("closed");
  });

  it("close() stops reconnecting", () => {
    const h = harness();
    h.client.connect();
    h.sockets[0].onopen!();
    h.client.close();
    expect(h.statuses[h.statuses.length - 1]).toBe("closed");
    expect(h.pending.length).toBe(0);
  });
});
