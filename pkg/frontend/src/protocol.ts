/** Wire protocol types: newline-delimited JSON messages from the engine,
 * commands back. The engine guarantees a gap-free, strictly increasing seq
 * per connection. */

export interface FrameMessage {
  kind: 'frame';
  seq: number;
  t: number;
  acc: [number, number, number];
  gyro: [number, number, number];
  orient: [number, number, number];
}

export interface UnitEventMessage {
  kind: 'unit_event';
  seq: number;
  t_ms: number;
  raw: string;
  voted: string | null;
  conf: number;
}

export interface ActivityEventMessage {
  kind: 'activity_event';
  seq: number;
  t0_ms: number;
  t1_ms: number;
  label: string;
  conf: number;
}

export interface NoveltyPromptMessage {
  kind: 'novelty_prompt';
  seq: number;
  candidate_id: string;
}

export interface ProgressMessage {
  kind: 'progress';
  seq: number;
  collected: number;
  target: number;
}

export interface RegistryUpdateMessage {
  kind: 'registry_update';
  seq: number;
  version: number;
  patterns: string[];
  activities: string[];
}

export interface SessionStateMessage {
  kind: 'session_state';
  seq: number;
  session: string;
  run_state: string;
  novelty_mode: string;
}

export interface CommandAckMessage {
  kind: 'command_ack';
  seq: number;
  cid: string;
  ok: true;
}

export interface ErrorMessage {
  kind: 'error';
  seq: number;
  cid?: string;
  message: string;
}

export type ServerMessage =
  | FrameMessage
  | UnitEventMessage
  | ActivityEventMessage
  | NoveltyPromptMessage
  | ProgressMessage
  | RegistryUpdateMessage
  | SessionStateMessage
  | CommandAckMessage
  | ErrorMessage;

export type CommandOp =
  | 'save_pattern'
  | 'ignore_pattern'
  | 'not_of_interest'
  | 'cancel_collection'
  | 'retrain'
  | 'pause'
  | 'resume'
  | 'stop';

export interface Command {
  kind: 'command';
  cid: string;
  op: CommandOp;
  name?: string;
  activity?: string;
}

const KINDS = new Set([
  'frame',
  'unit_event',
  'activity_event',
  'novelty_prompt',
  'progress',
  'registry_update',
  'session_state',
  'command_ack',
  'error',
]);

/** Parse one NDJSON line; returns null for lines this client does not know
 * (a newer engine may add kinds -- skipping keeps the stream usable). */
export function parseMessage(line: string): ServerMessage | null {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch {
    return null;
  }
  if (typeof obj !== 'object' || obj === null) return null;
  const msg = obj as Record<string, unknown>;
  if (typeof msg.kind !== 'string' || typeof msg.seq !== 'number') return null;
  if (!KINDS.has(msg.kind)) return null;
  return msg as unknown as ServerMessage;
}

export function serializeCommand(cmd: Command): string {
  return JSON.stringify(cmd) + '\n';
}
