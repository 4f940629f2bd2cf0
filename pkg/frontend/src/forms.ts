/** Decision forms: every operator action maps to exactly one protocol
 * command; validation failures never leave the client. */

import type { Command } from './protocol.js';

export interface SaveForm {
  decision: 'save';
  patternName: string;
  activityName: string;
}

export interface SimpleDecision {
  decision: 'ignore' | 'not_of_interest' | 'cancel_collection' | 'retrain';
}

export type DecisionForm = SaveForm | SimpleDecision;

export type FormResult = { ok: true; command: Command } | { ok: false; error: string };

let cidCounter = 0;

export function nextCid(): string {
  cidCounter += 1;
  return `ui-${cidCounter}`;
}

/** For tests: deterministic correlation ids. */
export function resetCids(): void {
  cidCounter = 0;
}

export function submitDecision(form: DecisionForm, cid: string = nextCid()): FormResult {
  switch (form.decision) {
    case 'save': {
      const name = form.patternName.trim();
      const activity = form.activityName.trim();
      if (name === '') return { ok: false, error: 'pattern name is required' };
      if (activity === '') return { ok: false, error: 'activity name is required' };
      return { ok: true, command: { kind: 'command', cid, op: 'save_pattern', name, activity } };
    }
    case 'ignore':
      return { ok: true, command: { kind: 'command', cid, op: 'ignore_pattern' } };
    case 'not_of_interest':
      return { ok: true, command: { kind: 'command', cid, op: 'not_of_interest' } };
    case 'cancel_collection':
      return { ok: true, command: { kind: 'command', cid, op: 'cancel_collection' } };
    case 'retrain':
      return { ok: true, command: { kind: 'command', cid, op: 'retrain' } };
    default: {
      const unreachable: never = form;
      void unreachable;
      return { ok: false, error: 'unknown decision' };
    }
  }
}
