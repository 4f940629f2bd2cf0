/** TCP protocol client: one duplex connection, reconnect with backoff,
 * resync by reconnecting (a fresh subscription replays the registry and
 * session state before live events). */

import * as net from 'node:net';
import { parseMessage, serializeCommand, type Command, type ServerMessage } from './protocol.js';

export interface ClientOptions {
  host: string;
  port: number;
  onMessage: (msg: ServerMessage) => void;
  onStatus: (status: 'connecting' | 'connected' | 'reconnecting' | 'closed') => void;
  /** Called when the reducer demands a resync; the client reconnects. */
  maxBackoffMs?: number;
}

export class ProtocolClient {
  private socket: net.Socket | null = null;
  private buffer = '';
  private backoffMs = 250;
  private closed = false;

  constructor(private readonly opts: ClientOptions) {}

  connect(): void {
    if (this.closed) return;
    this.opts.onStatus(this.socket === null ? 'connecting' : 'reconnecting');
    const socket = net.createConnection({ host: this.opts.host, port: this.opts.port });
    this.socket = socket;
    socket.setEncoding('utf-8');
    socket.on('connect', () => {
      this.backoffMs = 250;
      this.opts.onStatus('connected');
    });
    socket.on('data', (chunk: string) => {
      this.buffer += chunk;
      let idx;
      while ((idx = this.buffer.indexOf('\n')) >= 0) {
        const line = this.buffer.slice(0, idx);
        this.buffer = this.buffer.slice(idx + 1);
        if (line.trim() === '') continue;
        const msg = parseMessage(line);
        if (msg !== null) this.opts.onMessage(msg);
      }
    });
    const retry = () => {
      if (this.closed) {
        this.opts.onStatus('closed');
        return;
      }
      this.buffer = '';
      const delay = this.backoffMs;
      this.backoffMs = Math.min(this.backoffMs * 2, this.opts.maxBackoffMs ?? 10_000);
      setTimeout(() => this.connect(), delay);
      this.opts.onStatus('reconnecting');
    };
    socket.on('error', () => {
      /* close fires next */
    });
    socket.on('close', retry);
  }

  /** Drop the connection; the close handler schedules the reconnect. */
  resync(): void {
    this.socket?.destroy();
  }

  send(command: Command): void {
    this.socket?.write(serializeCommand(command));
  }

  close(): void {
    this.closed = true;
    this.socket?.destroy();
  }
}
