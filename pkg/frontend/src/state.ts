/** The console's view model: a pure fold over the message log.
 *
 * Replaying a captured log always reproduces the same view, which is how
 * the tests pin rendering behavior without a live engine.
 */

import type { ServerMessage } from './protocol.js';

export const CHART_WINDOW_MS = 60_000;
export const MS_PER_MINUTE = 60_000;

export interface ChartPoint {
  t: number;
  acc: [number, number, number];
  gyro: [number, number, number];
  orient: [number, number, number];
}

export type ModalState =
  | { phase: 'hidden' }
  | { phase: 'prompt'; candidateId: string; busy: boolean; error: string | null }
  | { phase: 'collecting'; collected: number; target: number }
  | { phase: 'retrain_confirm'; target: number; busy: boolean; error: string | null };

export interface TimelineCell {
  minute: number;
  activity: string;
  confidence: number;
}

export interface UiSessionView {
  connection: 'connecting' | 'connected' | 'reconnecting';
  sessionId: string | null;
  runState: string | null;
  lastSeq: number;
  needsResync: boolean;
  chart: ChartPoint[];
  rawPattern: string | null;
  votedPattern: string | null;
  patternConfidence: number | null;
  currentActivity: string | null;
  activityConfidence: number | null;
  modal: ModalState;
  registryVersion: number | null;
  patterns: string[];
  activities: string[];
  timeline: Map<number, TimelineCell>;
  notices: string[];
}

export function initialView(): UiSessionView {
  return {
    connection: 'connecting',
    sessionId: null,
    runState: null,
    lastSeq: 0,
    needsResync: false,
    chart: [],
    rawPattern: null,
    votedPattern: null,
    patternConfidence: null,
    currentActivity: null,
    activityConfidence: null,
    modal: { phase: 'hidden' },
    registryVersion: null,
    patterns: [],
    activities: [],
    timeline: new Map(),
    notices: [],
  };
}

function trimChart(chart: ChartPoint[]): ChartPoint[] {
  if (chart.length === 0) return chart;
  const latest = chart[chart.length - 1]!.t;
  const cutoff = latest - CHART_WINDOW_MS;
  let start = 0;
  while (start < chart.length && chart[start]!.t < cutoff) start++;
  return start > 0 ? chart.slice(start) : chart;
}

/** Fold activity spans into minute cells; conflicts keep the higher confidence. */
function placeOnTimeline(
  timeline: Map<number, TimelineCell>,
  t0: number,
  t1: number,
  activity: string,
  confidence: number,
): Map<number, TimelineCell> {
  const out = new Map(timeline);
  const first = Math.floor(t0 / MS_PER_MINUTE);
  const last = Math.max(first, Math.ceil(t1 / MS_PER_MINUTE) - 1);
  for (let minute = first; minute <= last; minute++) {
    const existing = out.get(minute);
    if (existing === undefined || confidence > existing.confidence) {
      out.set(minute, { minute, activity, confidence });
    }
  }
  return out;
}

/** Apply one message in seq order. A gap or regression flips needsResync;
 * the connection layer reacts by reconnecting for a fresh snapshot. */
export function applyMessage(view: UiSessionView, msg: ServerMessage): UiSessionView {
  if (view.lastSeq !== 0 && msg.seq !== view.lastSeq + 1) {
    return { ...view, needsResync: true };
  }
  const next: UiSessionView = { ...view, lastSeq: msg.seq, connection: 'connected' };
  switch (msg.kind) {
    case 'frame':
      next.chart = trimChart([
        ...view.chart,
        { t: msg.t, acc: msg.acc, gyro: msg.gyro, orient: msg.orient },
      ]);
      return next;
    case 'unit_event':
      next.rawPattern = msg.raw;
      next.votedPattern = msg.voted ?? view.votedPattern;
      next.patternConfidence = msg.conf;
      return next;
    case 'activity_event':
      next.currentActivity = msg.label;
      next.activityConfidence = msg.conf;
      next.timeline = placeOnTimeline(view.timeline, msg.t0_ms, msg.t1_ms, msg.label, msg.conf);
      return next;
    case 'novelty_prompt':
      next.modal = { phase: 'prompt', candidateId: msg.candidate_id, busy: false, error: null };
      return next;
    case 'progress':
      next.modal =
        msg.collected >= msg.target
          ? { phase: 'retrain_confirm', target: msg.target, busy: false, error: null }
          : { phase: 'collecting', collected: msg.collected, target: msg.target };
      return next;
    case 'registry_update':
      next.registryVersion = msg.version;
      next.patterns = msg.patterns;
      next.activities = msg.activities;
      return next;
    case 'session_state':
      next.sessionId = msg.session;
      next.runState = msg.run_state;
      return next;
    case 'command_ack':
      return resolveCommand(next, msg.cid, null);
    case 'error':
      if (msg.cid !== undefined) return resolveCommand(next, msg.cid, msg.message);
      next.notices = [...view.notices, msg.message];
      return next;
    default: {
      const unreachable: never = msg;
      void unreachable;
      return next;
    }
  }
}

/** An ack closes the pending form; a nack re-enables it with the error text. */
function resolveCommand(view: UiSessionView, _cid: string, error: string | null): UiSessionView {
  const modal = view.modal;
  if (modal.phase === 'prompt' && modal.busy) {
    return {
      ...view,
      modal: error === null ? { phase: 'hidden' } : { ...modal, busy: false, error },
    };
  }
  if (modal.phase === 'retrain_confirm' && modal.busy) {
    return {
      ...view,
      modal: error === null ? { phase: 'hidden' } : { ...modal, busy: false, error },
    };
  }
  if (error !== null) {
    return { ...view, notices: [...view.notices, error] };
  }
  return view;
}

/** Mark the modal's form as submitted (disabled until its ack arrives). */
export function markBusy(view: UiSessionView): UiSessionView {
  if (view.modal.phase === 'prompt' || view.modal.phase === 'retrain_confirm') {
    return { ...view, modal: { ...view.modal, busy: true, error: null } };
  }
  return view;
}

export function replayLog(lines: string[], parse: (line: string) => ServerMessage | null): UiSessionView {
  let view = initialView();
  for (const line of lines) {
    const msg = parse(line);
    if (msg !== null) view = applyMessage(view, msg);
  }
  return view;
}

/** Canonical serialization of the parts of the view the operator sees;
 * two identical logs must produce identical strings. */
export function viewFingerprint(view: UiSessionView): string {
  return JSON.stringify({
    runState: view.runState,
    lastSeq: view.lastSeq,
    needsResync: view.needsResync,
    chartSpan: view.chart.length === 0 ? null : [view.chart[0]!.t, view.chart[view.chart.length - 1]!.t],
    rawPattern: view.rawPattern,
    votedPattern: view.votedPattern,
    patternConfidence: view.patternConfidence,
    currentActivity: view.currentActivity,
    activityConfidence: view.activityConfidence,
    modal: view.modal,
    registryVersion: view.registryVersion,
    patterns: view.patterns,
    activities: view.activities,
    timeline: [...view.timeline.values()].sort((a, b) => a.minute - b.minute),
    notices: view.notices,
  });
}
