/** DOM rendering: pure state -> HTML/SVG, events handled via delegation. */

import { FactView, SchemaInfo } from './api.js';
import { factToNode, highlightFrom, layoutGraph } from './graph.js';
import { AppState } from './state.js';

function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function badge(status: string): string {
  return `<span class="badge badge-${esc(status)}">${esc(status)}</span>`;
}

function renderRecordBrowser(state: AppState): string {
  const schema = state.schema;
  if (!schema) return '<p class="muted">Loading schema…</p>';
  const keysByType = new Map<string, string[]>();
  for (const entry of state.recordKeys) {
    const bucket = keysByType.get(entry.type) ?? [];
    bucket.push(entry.key);
    keysByType.set(entry.type, bucket);
  }
  const sections = schema.records.map((record) => {
    const keys = (keysByType.get(record.name) ?? []).sort();
    const fieldRows = record.fields
      .map(
        (field) => `
        <tr>
          <td>${esc(field.name)}</td>
          <td>${badge(field.sort)}</td>
          <td><code>${esc(field.type)}</code></td>
        </tr>`,
      )
      .join('');
    const keyChips = keys
      .map((key) =>
        record.fields
          .map(
            (field) =>
              `<button class="chip" data-open-fact="${esc(
                `${record.name}[${key}].${field.name}`,
              )}">${esc(`${key}.${field.name}`)}</button>`,
          )
          .join(''),
      )
      .join('');
    return `
      <details class="record" open>
        <summary>${esc(record.name)} <span class="muted">${keys.length} record(s)</span></summary>
        <table class="fields"><thead><tr><th>field</th><th>sort</th><th>type</th></tr></thead>
          <tbody>${fieldRows}</tbody></table>
        <div class="chips">${keyChips || '<span class="muted">no records loaded</span>'}</div>
      </details>`;
  });
  return sections.join('');
}

function renderFactCard(view: FactView): string {
  const deps = view.depFields
    .map(
      (dep) =>
        `<li><a href="#" data-open-fact="${esc(dep)}">${esc(dep)}</a></li>`,
    )
    .join('');
  const types = view.depTypes.map((t) => `<code>${esc(t)}</code>`).join(' ');
  const value =
    view.valueText !== null
      ? `<div class="value" data-fact-value="${esc(view.factId)}">${esc(view.valueText)}</div>`
      : '';
  const errors = view.errors
    .map((e) => {
      const missing = /^(MissingFact|NoRuleDefined)$/.test(e.code);
      const ref = e.message.match(/([A-Z][A-Za-z0-9_]*\[[^\]]+\]\.[a-z0-9_]+)/)?.[1];
      const link =
        missing && ref
          ? ` <a href="#" data-open-fact="${esc(ref)}">${esc(ref)}</a>`
          : '';
      return `<li><code>${esc(e.code)}</code> ${esc(e.message)}${link}</li>`;
    })
    .join('');
  return `
    <article class="fact-card" data-fact-card="${esc(view.factId)}">
      <header>
        <code class="fact-id" data-select-fact="${esc(view.factId)}">${esc(view.factId)}</code>
        ${badge(view.status)}
        <button class="close" data-close-fact="${esc(view.factId)}">×</button>
      </header>
      ${value}
      ${errors ? `<ul class="errors">${errors}</ul>` : ''}
      <div class="deps">
        ${deps ? `<ul>${deps}</ul>` : '<span class="muted">no field dependencies</span>'}
        ${types ? `<div>scanned types: ${types}</div>` : ''}
      </div>
      <button data-show-missing="${esc(view.factId)}">what is missing?</button>
    </article>`;
}

function renderWhatIf(state: AppState): string {
  const rows = state.overrides
    .map(
      (o) => `
      <tr>
        <td><code>${esc(o.fact)}</code></td>
        <td><code>${esc(o.value)}</code></td>
        <td><button data-clear-override="${esc(o.fact)}">clear</button></td>
      </tr>`,
    )
    .join('');
  return `
    <form id="override-form">
      <input name="fact" placeholder="Type[key].field" required />
      <input name="value" placeholder="JSON value (false, 0.25, 2023)" required />
      <button type="submit">apply</button>
    </form>
    ${rows ? `<table class="overrides"><tbody>${rows}</tbody></table>` : '<p class="muted">no overrides</p>'}
    ${state.overrides.length > 1 ? '<button data-clear-all-overrides>clear all</button>' : ''}`;
}

function renderMissing(state: AppState): string {
  if (!state.missing) return '<p class="muted">Pick a fact and ask what is missing.</p>';
  const missing = state.missing.missing
    .map((m) => `<li data-missing-entry><a href="#" data-open-fact="${esc(m)}">${esc(m)}</a></li>`)
    .join('');
  const types = state.missing.types.map((t) => `<code>${esc(t)}</code>`).join(' ');
  return `
    <h3><code>${esc(state.missing.fact)}</code></h3>
    ${missing ? `<ul class="missing-list">${missing}</ul>` : '<p>Nothing missing: the fact is computable.</p>'}
    ${types ? `<div>record types that matter: ${types}</div>` : ''}`;
}

function renderGraph(state: AppState): string {
  const schema = state.schema;
  if (!schema) return '';
  const ruleNodes = schema.rules.map((r) => `${r.record}.${r.field}`);
  const layout = layoutGraph(ruleNodes, schema.fieldEdges);
  const selectedNode = state.selected ? factToNode(state.selected) : null;
  const highlight = highlightFrom(selectedNode, schema.fieldEdges);
  const edges = layout.edges
    .map((edge) => {
      const active = highlight.edges.has(`${edge.from}->${edge.to}`);
      return `<line x1="${edge.x1}" y1="${edge.y1}" x2="${edge.x2}" y2="${edge.y2}"
        class="edge${active ? ' active' : ''}" />`;
    })
    .join('');
  const nodes = layout.nodes
    .map((node) => {
      const active = highlight.nodes.has(node.id);
      return `<g class="node${active ? ' active' : ''}" transform="translate(${node.x},${node.y})">
        <circle r="5"></circle>
        <text x="10" y="4">${esc(node.id)}</text>
      </g>`;
    })
    .join('');
  return `<svg viewBox="0 0 ${layout.width} ${layout.height}" width="${layout.width}"
    height="${layout.height}">${edges}${nodes}</svg>`;
}

export function render(root: HTMLElement, state: AppState): void {
  const notice = state.notice
    ? `<div class="notice" role="alert">${esc(state.notice)}</div>`
    : '';
  const session = state.sessionId
    ? `<code>${esc(state.sessionId)}</code>`
    : '<span class="muted">none</span>';
  root.innerHTML = `
    ${notice}
    <header class="top">
      <h1>regula</h1>
      <div>session: ${session}</div>
      <form id="session-form">
        <textarea name="document" rows="3" placeholder='{"Corp": {"type": "Entity", ...}}'></textarea>
        <button type="submit">load dataset</button>
      </form>
    </header>
    <main class="columns">
      <section class="panel" id="browser"><h2>Data model</h2>${renderRecordBrowser(state)}</section>
      <section class="panel" id="inspector"><h2>Facts</h2>
        ${state.openFacts.map(renderFactCard).join('') || '<p class="muted">Open a fact from the browser.</p>'}
      </section>
      <section class="panel" id="whatif"><h2>What-if</h2>${renderWhatIf(state)}</section>
      <section class="panel" id="missing"><h2>Missing inputs</h2>${renderMissing(state)}</section>
    </main>
    <section class="panel" id="graph"><h2>Fact graph</h2>${renderGraph(state)}</section>`;
}
