import { beforeEach, describe, expect, it } from 'vitest';

import { resetCids, submitDecision } from '../src/forms.js';
import type { ServerMessage } from '../src/protocol.js';
import { applyMessage, initialView, markBusy, type UiSessionView } from '../src/state.js';

function msg(partial: Record<string, unknown>): ServerMessage {
  return partial as unknown as ServerMessage;
}

beforeEach(() => {
  resetCids();
});

describe('labeling round-trip', () => {
  function promptedView(): UiSessionView {
    let view = initialView();
    view = applyMessage(view, msg({ kind: 'registry_update', seq: 1, version: 3, patterns: ['walking'], activities: [] }));
    view = applyMessage(view, msg({ kind: 'novelty_prompt', seq: 2, candidate_id: 'cand-1' }));
    return view;
  }

  it('opens the modal on a novelty prompt', () => {
    const view = promptedView();
    expect(view.modal).toEqual({ phase: 'prompt', candidateId: 'cand-1', busy: false, error: null });
  });

  it('save form emits a save_pattern command with the exact fields', () => {
    const result = submitDecision({ decision: 'save', patternName: 'boxing', activityName: 'WORKOUT' });
    expect(result.ok).toBe(true);
    if (!result.ok) return;
    expect(result.command).toEqual({
      kind: 'command',
      cid: 'ui-1',
      op: 'save_pattern',
      name: 'boxing',
      activity: 'WORKOUT',
    });
  });

  it('empty names never leave the client', () => {
    expect(submitDecision({ decision: 'save', patternName: '  ', activityName: 'X' })).toEqual({
      ok: false,
      error: 'pattern name is required',
    });
    expect(submitDecision({ decision: 'save', patternName: 'x', activityName: '' })).toEqual({
      ok: false,
      error: 'activity name is required',
    });
  });

  it('progress messages drive the bar to completion and the retrain confirmation', () => {
    let view = promptedView();
    view = markBusy(view);
    view = applyMessage(view, msg({ kind: 'command_ack', seq: 3, cid: 'ui-1', ok: true }));
    expect(view.modal.phase).toBe('hidden');
    for (let collected = 4; collected < 120; collected++) {
      view = applyMessage(view, msg({ kind: 'progress', seq: collected, collected, target: 120 }));
      expect(view.modal).toEqual({ phase: 'collecting', collected, target: 120 });
    }
    view = applyMessage(view, msg({ kind: 'progress', seq: 120, collected: 120, target: 120 }));
    expect(view.modal).toEqual({ phase: 'retrain_confirm', target: 120, busy: false, error: null });
  });

  it('a retrain confirmation submits the retrain command and closes on ack', () => {
    let view = initialView();
    view = applyMessage(view, msg({ kind: 'progress', seq: 1, collected: 120, target: 120 }));
    const result = submitDecision({ decision: 'retrain' });
    expect(result.ok && result.command.op === 'retrain').toBe(true);
    view = markBusy(view);
    view = applyMessage(view, msg({ kind: 'command_ack', seq: 2, cid: 'ui-1', ok: true }));
    expect(view.modal.phase).toBe('hidden');
  });

  it('a nack re-enables the form with the error text', () => {
    let view = promptedView();
    view = markBusy(view);
    expect(view.modal.phase === 'prompt' && view.modal.busy).toBe(true);
    view = applyMessage(
      view,
      msg({ kind: 'error', seq: 3, cid: 'ui-1', message: "pattern 'boxing' already exists" }),
    );
    expect(view.modal).toEqual({
      phase: 'prompt',
      candidateId: 'cand-1',
      busy: false,
      error: "pattern 'boxing' already exists",
    });
  });

  it('ignore and not-of-interest map to their ops', () => {
    const ignore = submitDecision({ decision: 'ignore' });
    const noi = submitDecision({ decision: 'not_of_interest' });
    expect(ignore.ok && ignore.command.op === 'ignore_pattern').toBe(true);
    expect(noi.ok && noi.command.op === 'not_of_interest').toBe(true);
    if (ignore.ok) {
      expect(ignore.command.name).toBeUndefined();
    }
  });

  it('correlation ids are unique per submission', () => {
    const a = submitDecision({ decision: 'retrain' });
    const b = submitDecision({ decision: 'retrain' });
    if (a.ok && b.ok) {
      expect(a.command.cid).not.toBe(b.command.cid);
    } else {
      throw new Error('expected both submissions to validate');
    }
  });
});
