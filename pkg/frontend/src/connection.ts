// Thin WebSocket wrapper. An injectable socket factory keeps the console
// logic testable without a browser or a live server.

import { parseServerMsg, ServerMsg } from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ConnectionHandlers {
  onOpen: () => void;
  onClose: () => void;
  onMessage: (msg: ServerMsg) => void;
}

export class SessionConnection {
  private socket: SocketLike | null = null;
  private open = false;

  constructor(
    private url: string,
    private handlers: ConnectionHandlers,
    private factory: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
  ) {}

  connect(): void {
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.open = true;
      this.handlers.onOpen();
    };
    socket.onclose = () => {
      this.open = false;
      this.handlers.onClose();
    };
    socket.onmessage = (ev) => {
      const msg = parseServerMsg(ev.data);
      if (msg !== null) this.handlers.onMessage(msg);
    };
  }

  get isOpen(): boolean {
    return this.open;
  }

  send(data: string): boolean {
    if (!this.open || this.socket === null) return false;
    this.socket.send(data);
    return true;
  }

  close(): void {
    this.socket?.close();
  }
}

export function defaultSessionUrl(loc: { protocol: string; host: string }): string {
  const scheme = loc.protocol === "https:" ? "wss://" : "ws://";
  return scheme + loc.host + "/session";
}
