import { describe, expect, it } from 'vitest';

import type { TimelineCell } from '../src/state.js';
import { MINUTES_PER_DAY, dayStrip, hoverText, runs } from '../src/timeline.js';

function cells(entries: [number, string, number][]): Map<number, TimelineCell> {
  return new Map(
    entries.map(([minute, activity, confidence]) => [minute, { minute, activity, confidence }]),
  );
}

describe('day strip', () => {
  it('is 1440 cells, unlabeled when empty', () => {
    const strip = dayStrip(new Map());
    expect(strip.cells).toHaveLength(MINUTES_PER_DAY);
    expect(strip.cells.every((c) => c === null)).toBe(true);
    expect(runs(strip)).toEqual([]);
  });

  it('renders one contiguous block as a single run', () => {
    const hour: [number, string, number][] = [];
    for (let m = 120; m < 180; m++) hour.push([m, 'GUITAR_PRACTICE', 0.9]);
    const strip = dayStrip(cells(hour));
    expect(runs(strip)).toEqual([{ activity: 'GUITAR_PRACTICE', startMinute: 120, length: 60 }]);
  });

  it('renders back-to-back activities as two runs', () => {
    const strip = dayStrip(
      cells([
        [10, 'PLAY_BASKETBALL', 0.8],
        [11, 'PLAY_BASKETBALL', 0.8],
        [12, 'LIVE_CONCERT', 0.7],
        [13, 'LIVE_CONCERT', 0.7],
      ]),
    );
    expect(runs(strip)).toEqual([
      { activity: 'PLAY_BASKETBALL', startMinute: 10, length: 2 },
      { activity: 'LIVE_CONCERT', startMinute: 12, length: 2 },
    ]);
  });

  it('a gap splits a run', () => {
    const strip = dayStrip(
      cells([
        [5, 'X', 0.5],
        [7, 'X', 0.5],
      ]),
    );
    expect(runs(strip)).toHaveLength(2);
  });

  it('hover reveals the confidence', () => {
    const strip = dayStrip(cells([[42, 'PLAY_BASKETBALL', 0.87]]));
    expect(hoverText(strip, 42)).toBe('minute 42: PLAY_BASKETBALL (87%)');
    expect(hoverText(strip, 43)).toBe('minute 43: unlabeled');
  });

  it('ignores minutes outside the day', () => {
    const strip = dayStrip(cells([[-1, 'X', 0.5], [MINUTES_PER_DAY, 'X', 0.5], [3, 'X', 0.5]]));
    expect(runs(strip)).toEqual([{ activity: 'X', startMinute: 3, length: 1 }]);
  });
});
