/**
 * DOM wiring: a single-page planner with a spec editor pane, a run console,
 * and the alarm feed. All logic lives in the framework-free modules; this
 * file only translates views into HTML and clicks into calls.
 */

import { ApiClient } from './api.js';
import { RunConsole, type ConsoleView } from './run-console.js';
import { SpecEditor } from './spec-editor.js';
import { initialViewState, toggleComparison, type ViewState } from './state.js';

const apiBase =
  new URLSearchParams(window.location.search).get('api') ??
  window.location.origin;
const api = new ApiClient(apiBase);
const editor = new SpecEditor(api);
let view: ViewState = initialViewState();
let consoleHandle: RunConsole | null = null;

function el(id: string): HTMLElement {
  const found = document.getElementById(id);
  if (!found) {
    throw new Error(`missing #${id}`);
  }
  return found;
}

function fmt(value: number | null): string {
  return value === null ? 'n/a' : value.toFixed(4);
}

function renderConsole(model: ConsoleView): void {
  el('run-state').textContent = `${model.runId} — ${model.state}` +
    (model.diagnostic ? ` (${model.diagnostic})` : '');
  (el('advance') as HTMLButtonElement).disabled = !model.controls.canAdvance;
  (el('incept') as HTMLButtonElement).disabled = !model.controls.canIncept;
  el('advance').textContent = model.controls.advanceLabel || 'Advance';

  const loopback = el('loopback-targets');
  loopback.innerHTML = '';
  for (const target of model.controls.loopBackTargets) {
    const button = document.createElement('button');
    button.textContent = `↩ ${target}`;
    button.onclick = () => void consoleHandle?.loopBack(target);
    loopback.appendChild(button);
  }

  const rows = model.variants
    .map((v) => {
      const compared = view.comparedGenomes.some(
        (g) => g.join(' ') === v.genome.join(' '),
      );
      const badge = v.stale ? ' <span class="badge stale">stale</span>' : '';
      const perf = (v.performance ?? []).map(fmt).join(', ');
      return `<tr data-genome="${v.genome.join(',')}" class="${compared ? 'compared' : ''}">` +
        `<td>${v.rank ?? '—'}</td><td>${v.genome.join(' · ')}${badge}</td>` +
        `<td>${v.fitness.toFixed(4)}</td><td>${perf}</td></tr>`;
    })
    .join('');
  el('variants').innerHTML =
    '<tr><th>rank</th><th>assignment</th><th>fitness</th><th>performance</th></tr>' +
    rows;
  for (const row of el('variants').querySelectorAll('tr[data-genome]')) {
    (row as HTMLElement).onclick = () => {
      const genome = (row as HTMLElement).dataset.genome!.split(',');
      view = toggleComparison(view, genome);
    };
  }

  const comparison = model.variants.filter((v) =>
    view.comparedGenomes.some((g) => g.join(' ') === v.genome.join(' ')),
  );
  el('comparison').innerHTML = comparison
    .map(
      (v) =>
        `<div class="panel"><h4>${v.genome.join(' · ')}</h4><ul>` +
        Object.entries(v.socialBreakdown)
          .map(([req, degree]) => `<li>${req}: ${degree.toFixed(3)}</li>`)
          .join('') +
        '</ul></div>',
    )
    .join('');

  el('alarms').innerHTML = model.alarms
    .map(
      (n) =>
        `<li>[${n.seq}] ${n.indicator} ${n.op} ${n.threshold} ` +
        `(value ${n.value}) → ${n.subscriber}</li>`,
    )
    .join('');
}

async function startRun(oracle: boolean): Promise<void> {
  const specId = (el('spec-id') as HTMLInputElement).value;
  const seed = Number((el('seed') as HTMLInputElement).value || '0');
  const run = await api.startRun(specId, { seed }, oracle);
  view = { ...view, activeRunId: run.run_id, comparedGenomes: [] };
  consoleHandle?.stop();
  consoleHandle = new RunConsole(api, run.run_id, renderConsole);
  consoleHandle.start();
}

function wire(): void {
  el('load-spec').onclick = async () => {
    const doc = await editor.load((el('spec-id') as HTMLInputElement).value);
    (el('spec-json') as HTMLTextAreaElement).value = JSON.stringify(doc, null, 2);
  };
  el('submit-spec').onclick = async () => {
    editor.edit((draft) => {
      const text = (el('spec-json') as HTMLTextAreaElement).value;
      Object.assign(draft, JSON.parse(text));
    });
    const status = await editor.submit();
    el('spec-violations').innerHTML = status.submitted
      ? '<li class="ok">saved</li>'
      : status.violations
          .map((v) => `<li>${v.category}: ${v.message}</li>`)
          .join('') + (status.retryable ? '<li>network failure — retry</li>' : '');
  };
  el('start-run').onclick = () => void startRun(false);
  el('start-oracle').onclick = () => void startRun(true);
  el('advance').onclick = () => void consoleHandle?.advance();
  el('incept').onclick = async () => {
    const voId = await consoleHandle?.incept();
    if (voId) {
      el('run-state').textContent += ` → incepted ${voId}`;
    }
  };
}

wire();
