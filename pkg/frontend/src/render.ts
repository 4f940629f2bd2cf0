/** Plain-text rendering of the view for the terminal console. */

import type { UiSessionView } from './state.js';
import { dayStrip, runs } from './timeline.js';

function sparkline(values: number[], width = 24): string {
  if (values.length === 0) return ''.padEnd(width);
  const glyphs = '▁▂▃▄▅▆▇█';
  const tail = values.slice(-width);
  const lo = Math.min(...tail);
  const hi = Math.max(...tail);
  const span = hi - lo || 1;
  return tail
    .map((v) => glyphs[Math.min(glyphs.length - 1, Math.floor(((v - lo) / span) * glyphs.length))])
    .join('')
    .padEnd(width);
}

function progressBar(collected: number, target: number, width = 30): string {
  const filled = Math.round((collected / target) * width);
  return `[${'#'.repeat(filled)}${'-'.repeat(width - filled)}] ${collected}/${target}`;
}

export function render(view: UiSessionView): string {
  const lines: string[] = [];
  lines.push(
    `session ${view.sessionId ?? '?'}  ${view.connection}  run=${view.runState ?? '?'}` +
      (view.needsResync ? '  [RESYNC]' : ''),
  );
  const accMag = view.chart.map((p) => Math.hypot(p.acc[0], p.acc[1], p.acc[2]));
  lines.push(`accel |${sparkline(accMag)}|  ${view.chart.length} pts / last 60 s`);
  const conf = view.patternConfidence === null ? '' : ` (${(view.patternConfidence * 100).toFixed(0)}%)`;
  lines.push(`pattern  raw=${view.rawPattern ?? '-'}  voted=${view.votedPattern ?? '-'}${conf}`);
  const actConf =
    view.activityConfidence === null ? '' : ` (${(view.activityConfidence * 100).toFixed(0)}%)`;
  lines.push(`activity ${view.currentActivity ?? '-'}${actConf}`);
  lines.push(`registry v${view.registryVersion ?? '-'}: ${view.patterns.join(', ') || '(empty)'}`);

  switch (view.modal.phase) {
    case 'hidden':
      break;
    case 'prompt':
      lines.push(`>> new pattern detected (${view.modal.candidateId})`);
      lines.push(
        view.modal.busy
          ? '   waiting for engine...'
          : '   [s]ave <name> <activity> / [i]gnore / [n]ot of interest',
      );
      if (view.modal.error !== null) lines.push(`   error: ${view.modal.error}`);
      break;
    case 'collecting':
      lines.push(`>> collecting ${progressBar(view.modal.collected, view.modal.target)}`);
      break;
    case 'retrain_confirm':
      lines.push(`>> collection complete ${progressBar(view.modal.target, view.modal.target)}`);
      lines.push(view.modal.busy ? '   retraining...' : '   [r]etrain now / [esc] later');
      if (view.modal.error !== null) lines.push(`   error: ${view.modal.error}`);
      break;
  }

  const strip = runs(dayStrip(view.timeline));
  if (strip.length > 0) {
    const parts = strip.map((r) => `${r.activity}@${r.startMinute}+${r.length}m`);
    lines.push(`timeline ${parts.join('  ')}`);
  }
  for (const notice of view.notices.slice(-3)) {
    lines.push(`! ${notice}`);
  }
  return lines.join('\n');
}
