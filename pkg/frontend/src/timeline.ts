/** Day-strip rendering: 1440 minute cells colored by activity. */

import type { TimelineCell } from './state.js';

export const MINUTES_PER_DAY = 1440;

export interface DayStrip {
  cells: (TimelineCell | null)[];
}

export function dayStrip(timeline: Map<number, TimelineCell>): DayStrip {
  const cells: (TimelineCell | null)[] = new Array(MINUTES_PER_DAY).fill(null);
  for (const cell of timeline.values()) {
    if (cell.minute >= 0 && cell.minute < MINUTES_PER_DAY) {
      cells[cell.minute] = cell;
    }
  }
  return { cells };
}

export interface ActivityRun {
  activity: string;
  startMinute: number;
  length: number;
}

/** Contiguous same-activity runs, for compact rendering and tests. */
export function runs(strip: DayStrip): ActivityRun[] {
  const out: ActivityRun[] = [];
  let current: ActivityRun | null = null;
  for (let minute = 0; minute < strip.cells.length; minute++) {
    const cell = strip.cells[minute] ?? null;
    const activity = cell === null ? null : cell.activity;
    if (activity !== null && current !== null && current.activity === activity
        && current.startMinute + current.length === minute) {
      current.length += 1;
      continue;
    }
    if (activity !== null) {
      current = { activity, startMinute: minute, length: 1 };
      out.push(current);
    } else {
      current = null;
    }
  }
  return out;
}

export function hoverText(strip: DayStrip, minute: number): string {
  const cell = strip.cells[minute] ?? null;
  if (cell === null) return `minute ${minute}: unlabeled`;
  return `minute ${minute}: ${cell.activity} (${(cell.confidence * 100).toFixed(0)}%)`;
}
