// WebSocket bus client: same JSON frame grammar as the TCP endpoint, one
// frame per message.  Reconnects with capped exponential backoff and
// restores subscriptions after a broker restart.

import type { BusFrame } from "./types.js";

export type ConnectionStatus = "connecting" | "connected" | "disconnected";

export function parseFrame(text: string): BusFrame | null {
  try {
    const obj = JSON.parse(text);
    if (obj && typeof obj === "object" && typeof obj.op === "string") {
      return obj as BusFrame;
    }
    return null;
  } catch {
    return null;
  }
}

export function encodePub(topic: string, data: unknown): string {
  return JSON.stringify({ op: "pub", topic, data });
}

export function encodeSub(pattern: string): string {
  return JSON.stringify({ op: "sub", topic: pattern });
}

// 0.5s, 1s, 2s, 4s, then 5s forever
export function backoffDelayMs(attempt: number): number {
  return Math.min(500 * 2 ** Math.max(attempt, 0), 5000);
}

type WsLike = {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
};

export interface BusClientOptions {
  wsFactory?: (url: string) => WsLike;
  onStatus?: (status: ConnectionStatus) => void;
  scheduler?: (fn: () => void, ms: number) => unknown;
}

export class BusClient {
  url: string;
  status: ConnectionStatus = "disconnected";
  private ws: WsLike | null = null;
  private patterns: string[] = [];
  private handlers = new Map<string, ((data: any, frame: BusFrame) => void)[]>();
  private attempt = 0;
  private closed = false;
  private opts: BusClientOptions;

  constructor(url: string, opts: BusClientOptions = {}) {
    this.url = url;
    this.opts = opts;
  }

  private setStatus(s: ConnectionStatus) {
    this.status = s;
    this.opts.onStatus?.(s);
  }

  connect(): void {
    if (this.closed) return;
    const factory =
      this.opts.wsFactory ??
      ((url: string) => new (globalThis as any).WebSocket(url) as WsLike);
    this.setStatus("connecting");
    const ws = factory(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.attempt = 0;
      this.setStatus("connected");
      for (const p of this.patterns) ws.send(encodeSub(p));
    };
    ws.onmessage = (ev) => {
      const frame = parseFrame(String(ev.data));
      if (frame && frame.op === "pub" && frame.topic) {
        for (const h of this.handlers.get(frame.topic) ?? []) {
          h(frame.data, frame);
        }
      }
    };
    ws.onerror = () => {};
    ws.onclose = () => {
      this.ws = null;
      if (this.closed) return;
      this.setStatus("disconnected");
      const delay = backoffDelayMs(this.attempt++);
      const schedule = this.opts.scheduler ?? ((fn, ms) => setTimeout(fn, ms));
      schedule(() => this.connect(), delay);
    };
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
    this.setStatus("disconnected");
  }

  subscribe(pattern: string): void {
    if (!this.patterns.includes(pattern)) this.patterns.push(pattern);
    if (this.status === "connected" && this.ws) this.ws.send(encodeSub(pattern));
  }

  on(topic: string, handler: (data: any, frame: BusFrame) => void): void {
    const list = this.handlers.get(topic) ?? [];
    list.push(handler);
    this.handlers.set(topic, list);
    this.subscribe(topic);
  }

  publish(topic: string, data: unknown): boolean {
    if (this.status !== "connected" || !this.ws) return false;
    this.ws.send(encodePub(topic, data));
    return true;
  }
}
