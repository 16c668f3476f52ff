/** Pure view functions: state in, HTML string out. The shell in main.ts only
 * wires events; keeping views pure makes them testable without a DOM. */

import type { RecordDetail, RecordSummary, SummaryRow, Histogram } from "./api.js";
import {
  CRITERIA,
  CRITERION_TEXT,
  type Criterion,
  type Toggles,
  decisionPreview,
  formatScore,
  scoreOf,
} from "./score.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderAge(createdAt: string, now: Date): string {
  const ms = now.getTime() - new Date(createdAt).getTime();
  const minutes = Math.max(0, Math.floor(ms / 60_000));
  if (minutes < 1) return "just now";
  if (minutes < 60) return `${minutes}m ago`;
  const hours = Math.floor(minutes / 60);
  if (hours < 48) return `${hours}h ago`;
  return `${Math.floor(hours / 24)}d ago`;
}

function prescreenBadges(prescreen: Record<string, 0 | 1 | null>): string {
  return ["s1", "s2", "s3", "s4"]
    .map((name) => {
      const value = prescreen[name];
      const cls = value === 1 ? "pass" : value === 0 ? "fail" : "unset";
      return `<span class="badge ${cls}" title="machine prescreen ${name}">${name}=${
        value === null ? "?" : value
      }</span>`;
    })
    .join(" ");
}

export function queueView(records: RecordSummary[], now: Date): string {
  if (records.length === 0) {
    return `<section class="queue"><p class="empty">No pending reviews.</p></section>`;
  }
  const rows = records
    .map(
      (r) => `
      <tr class="queue-row" data-record-id="${escapeHtml(r.id)}">
        <td><a href="#/record/${escapeHtml(r.id)}">${escapeHtml(r.service)}/${escapeHtml(
          r.resource,
        )}</a></td>
        <td>${escapeHtml(r.control_type)}</td>
        <td>${prescreenBadges(r.prescreen)}</td>
        <td>${renderAge(r.created_at, now)}</td>
      </tr>`,
    )
    .join("");
  return `
    <section class="queue">
      <table>
        <thead><tr><th>Resource</th><th>Control type</th><th>Prescreen</th><th>Age</th></tr></thead>
        <tbody>${rows}</tbody>
      </table>
    </section>`;
}

export interface ParsedScenario {
  title: string;
  steps: { keyword: string; text: string }[];
}

export interface ParsedGherkin {
  header: string[];
  scenarios: ParsedScenario[];
}

/** Split canonical dialect text into header lines and scenario blocks. */
export function splitGherkin(text: string): ParsedGherkin {
  const header: string[] = [];
  const scenarios: ParsedScenario[] = [];
  let current: ParsedScenario | null = null;
  for (const raw of text.split("\n")) {
    const line = raw.trim();
    if (!line) continue;
    if (line.startsWith("Scenario:")) {
      current = { title: line.slice("Scenario:".length).trim(), steps: [] };
      scenarios.push(current);
    } else if (current) {
      const match = line.match(/^(Given|When|Then|And)\s+(.*)$/);
      if (match) current.steps.push({ keyword: match[1], text: match[2] });
    } else {
      header.push(line);
    }
  }
  return { header, scenarios };
}

/** Escape, then wrap backtick spans; dot-path spans get the field-ref style. */
export function highlightRefs(stepText: string): string {
  return escapeHtml(stepText).replace(/`([^`]+)`/g, (_whole, span: string) => {
    const isPath = /^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)+$/.test(span);
    return `<code class="${isPath ? "field-ref" : "value-ref"}">${span}</code>`;
  });
}

function toggleRow(name: Criterion, toggles: Toggles, machineValue: 0 | 1 | null, confirmed: boolean): string {
  const value = toggles[name];
  const machineHint =
    machineValue !== null && !confirmed
      ? ` <span class="machine-hint" title="machine prescreen value, not yet confirmed">machine</span>`
      : "";
  const buttons = ([1, 0] as const)
    .map(
      (bit) => `
      <button class="toggle ${value === bit ? "selected" : ""} ${
        value === bit && machineValue === bit && !confirmed ? "machine" : ""
      }"
        data-criterion="${name}" data-value="${bit}">${bit === 1 ? "pass" : "fail"}</button>`,
    )
    .join("");
  return `
    <div class="criterion" title="${escapeHtml(CRITERION_TEXT[name])}">
      <span class="criterion-name">${name.toUpperCase()}</span>
      <span class="criterion-text">${escapeHtml(CRITERION_TEXT[name])}</span>
      ${buttons}${machineHint}
    </div>`;
}

export interface DetailState {
  record: RecordDetail;
  toggles: Toggles;
  confirmed: Set<Criterion>;
  needsRevision: boolean;
}

export function detailView(state: DetailState): string {
  const { record, toggles, needsRevision } = state;
  const live = scoreOf(toggles);
  const preview = decisionPreview(live, needsRevision);
  const parsed = record.gherkin_text ? splitGherkin(record.gherkin_text) : null;
  const s2 = record.rubric.s2.value;
  const scenarioPanels = parsed
    ? parsed.scenarios
        .map(
          (scenario) => `
        <article class="scenario">
          <h3>${escapeHtml(scenario.title)}
            <span class="badge ${s2 === 1 ? "pass" : s2 === 0 ? "fail" : "unset"}"
              title="machine field-existence result (S2)">S2=${s2 === null ? "?" : s2}</span>
          </h3>
          <ol>${scenario.steps
            .map(
              (step) =>
                `<li><strong>${step.keyword}</strong> ${highlightRefs(step.text)}</li>`,
            )
            .join("")}</ol>
        </article>`,
        )
        .join("")
    : `<p class="empty">No parsed control on this record.</p>`;
  const findings = record.findings
    .map(
      (f) =>
        `<li class="${f.severity.toLowerCase()}">${f.severity}: ${escapeHtml(f.message)}</li>`,
    )
    .join("");
  const header = parsed
    ? `<pre class="gherkin-header">${escapeHtml(parsed.header.join("\n"))}</pre>`
    : "";
  const nrDisabled = live === null || live < 2.5 ? "disabled" : "";
  const submitDisabled = live === null ? "disabled" : "";
  return `
    <section class="detail" data-record-id="${escapeHtml(record.id)}">
      <h2>${escapeHtml(record.service)}/${escapeHtml(record.resource)} · ${escapeHtml(
        record.control_type,
      )} <span class="status">${escapeHtml(record.status)}</span></h2>
      ${header}
      ${scenarioPanels}
      ${findings ? `<ul class="findings">${findings}</ul>` : ""}
      <div class="rubric">
        ${CRITERIA.map((c) =>
          toggleRow(c, toggles, record.rubric[c].provenance === "Machine" ? record.rubric[c].value : null, state.confirmed.has(c)),
        ).join("")}
      </div>
      <div class="verdict">
        <span class="live-score">Live score: <strong>${formatScore(live)}</strong> / 5</span>
        <span class="preview preview-${preview.toLowerCase()}">Preview: ${preview}</span>
        <label><input type="checkbox" id="needs-revision" ${
          needsRevision ? "checked" : ""
        } ${nrDisabled}/> needs revision</label>
        <button id="submit-review" ${submitDisabled}>Submit review</button>
      </div>
    </section>`;
}

export function reportsView(rows: SummaryRow[], histogram: Histogram | null, binWidth: number): string {
  const table =
    rows.length === 0
      ? `<p class="empty">No completed reviews yet.</p>`
      : `<table>
          <thead><tr><th>Control type</th><th>Records</th><th>Scenario score</th>
          <th>Rule score</th><th>Final score</th><th>Mean item score</th></tr></thead>
          <tbody>${rows
            .map(
              (r) => `<tr>
                <td>${escapeHtml(r.control_type)}</td>
                <td>${r.count}</td>
                <td>${r.mean_scenario_sum.toFixed(2)}</td>
                <td>${r.mean_rule_avg.toFixed(2)}</td>
                <td class="final">${r.table_final.toFixed(2)}</td>
                <td>${r.mean_item_final.toFixed(2)}</td>
              </tr>`,
            )
            .join("")}</tbody>
        </table>`;
  let chart = `<p class="empty">No scores to chart.</p>`;
  if (histogram && histogram.total > 0) {
    const max = Math.max(...histogram.bins.map((b) => b.count), 1);
    chart = `<div class="histogram">${histogram.bins
      .map(
        (b) => `
        <div class="bar-row">
          <span class="bar-label">[${b.start.toFixed(2)}, ${(b.start + histogram.bin_width).toFixed(2)})</span>
          <div class="bar" style="width:${(100 * b.count) / max}%"></div>
          <span class="bar-count">${b.count}</span>
        </div>`,
      )
      .join("")}</div>`;
  }
  const widthOptions = [0.25, 0.5, 1.0]
    .map(
      (w) =>
        `<option value="${w}" ${w === binWidth ? "selected" : ""}>${w}</option>`,
    )
    .join("");
  return `
    <section class="reports">
      <h2>Review summary</h2>
      ${table}
      <h2>Score histogram</h2>
      <label>Bin width <select id="bin-width">${widthOptions}</select></label>
      ${chart}
    </section>`;
}

export function loginView(message = ""): string {
  return `
    <section class="login">
      <h2>Reviewer sign-in</h2>
      ${message ? `<p class="banner error">${escapeHtml(message)}</p>` : ""}
      <label>API token <input type="password" id="token-input" autofocus/></label>
      <label>Your name <input type="text" id="reviewer-input" placeholder="reviewer"/></label>
      <button id="token-save">Start reviewing</button>
    </section>`;
}

export function bannerView(kind: "error" | "info", message: string): string {
  return `<div class="banner ${kind}">${escapeHtml(message)}</div>`;
}
