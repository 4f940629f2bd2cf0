/** Terminal console: connect to a running engine, watch the live feed,
 * answer novelty prompts, trigger retraining.
 *
 *   node dist/main.js --connect 127.0.0.1:7600
 *
 * Keys: s <name> <activity> save a candidate; i ignore; n not of interest;
 * c cancel collection; r retrain; p pause; u resume; q quit.
 */

import * as readline from 'node:readline';
import { ProtocolClient } from './client.js';
import { submitDecision, type DecisionForm } from './forms.js';
import { render } from './render.js';
import { applyMessage, initialView, markBusy, type UiSessionView } from './state.js';

function parseArgs(argv: string[]): { host: string; port: number } {
  const idx = argv.indexOf('--connect');
  const spec = idx >= 0 ? argv[idx + 1] : undefined;
  if (argv.includes('--help') || spec === undefined) {
    console.log('usage: main.js --connect HOST:PORT');
    process.exit(argv.includes('--help') ? 0 : 1);
  }
  const sep = spec.lastIndexOf(':');
  const host = spec.slice(0, sep);
  const port = Number(spec.slice(sep + 1));
  if (host === '' || !Number.isInteger(port)) {
    console.error(`bad --connect spec: ${spec}`);
    process.exit(1);
  }
  return { host, port };
}

function main(): void {
  const { host, port } = parseArgs(process.argv.slice(2));
  let view: UiSessionView = initialView();

  const repaint = (): void => {
    process.stdout.write('\x1b[2J\x1b[H' + render(view) + '\n> ');
  };

  const client = new ProtocolClient({
    host,
    port,
    onMessage: (msg) => {
      view = applyMessage(view, msg);
      if (view.needsResync) {
        view = { ...initialView(), connection: 'reconnecting' };
        client.resync();
      }
      repaint();
    },
    onStatus: (status) => {
      if (status === 'closed') process.exit(0);
      view = { ...view, connection: status === 'connected' ? 'connected' : 'reconnecting' };
      repaint();
    },
  });
  client.connect();

  const rl = readline.createInterface({ input: process.stdin, output: process.stdout });
  rl.on('line', (line) => {
    const [key, ...rest] = line.trim().split(/\s+/);
    let form: DecisionForm | null = null;
    switch (key) {
      case 's':
        form = { decision: 'save', patternName: rest[0] ?? '', activityName: rest[1] ?? '' };
        break;
      case 'i':
        form = { decision: 'ignore' };
        break;
      case 'n':
        form = { decision: 'not_of_interest' };
        break;
      case 'c':
        form = { decision: 'cancel_collection' };
        break;
      case 'r':
        form = { decision: 'retrain' };
        break;
      case 'p':
        client.send({ kind: 'command', cid: `ui-p${Date.now()}`, op: 'pause' });
        return;
      case 'u':
        client.send({ kind: 'command', cid: `ui-u${Date.now()}`, op: 'resume' });
        return;
      case 'q':
        client.close();
        rl.close();
        process.exit(0);
      default:
        return;
    }
    const result = submitDecision(form);
    if (!result.ok) {
      view = { ...view, notices: [...view.notices, result.error] };
      repaint();
      return;
    }
    view = markBusy(view);
    client.send(result.command);
    repaint();
  });
}

main();
