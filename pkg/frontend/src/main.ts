/** Explorer entry point: form panels, live diagram, run cards, comparison. */

import { ApiClient, ApiError, reportMetrics } from "./api.js";
import { barChartSvg, speedups } from "./charts.js";
import { deriveDiagram, renderDiagramSvg } from "./diagram.js";
import { PANELS, configFromForm, defaultFormState, fourCoreSampleState,
         selectedBenchmark, type FormState } from "./forms.js";
import { RunStore } from "./state.js";
import type { RunCard, SystemConfig } from "./types.js";

const api = new ApiClient("");
const store = new RunStore();
let formState: FormState = defaultFormState();
let lastValidation: { ok: boolean; errors: string[]; warnings: string[] } | null = null;
let validateTimer: number | undefined;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function renderForm(): void {
  const host = el<HTMLDivElement>("panels");
  host.innerHTML = "";
  for (const panel of PANELS) {
    const details = document.createElement("details");
    details.open = panel.name === "Core" || panel.name === "Program";
    const summary = document.createElement("summary");
    summary.textContent = panel.name;
    details.appendChild(summary);
    for (const field of panel.fields) {
      const row = document.createElement("label");
      row.className = "field";
      const span = document.createElement("span");
      span.textContent = field.label;
      row.appendChild(span);
      let input: HTMLInputElement | HTMLSelectElement;
      if (field.kind === "select") {
        input = document.createElement("select");
        for (const opt of field.options ?? []) {
          const o = document.createElement("option");
          o.value = opt;
          o.textContent = opt;
          input.appendChild(o);
        }
        input.value = String(formState[field.key]);
      } else if (field.kind === "bool") {
        input = document.createElement("input");
        input.type = "checkbox";
        (input as HTMLInputElement).checked = Boolean(formState[field.key]);
      } else {
        input = document.createElement("input");
        input.type = "number";
        if (field.min !== undefined) input.min = String(field.min);
        if (field.max !== undefined) input.max = String(field.max);
        input.value = String(formState[field.key]);
      }
      input.addEventListener("change", () => {
        if (field.kind === "bool") {
          formState[field.key] = (input as HTMLInputElement).checked;
        } else if (field.kind === "int") {
          formState[field.key] = parseInt(input.value, 10) || 0;
        } else {
          formState[field.key] = input.value;
        }
        onConfigEdited();
      });
      row.appendChild(input);
      details.appendChild(row);
    }
    host.appendChild(details);
  }
}

function onConfigEdited(): void {
  const cfg = configFromForm(formState);
  el<HTMLDivElement>("diagram").innerHTML = renderDiagramSvg(deriveDiagram(cfg));
  el<HTMLPreElement>("config-json").textContent = JSON.stringify(cfg, null, 2);
  window.clearTimeout(validateTimer);
  validateTimer = window.setTimeout(() => void revalidate(cfg), 250);
}

async function revalidate(cfg: SystemConfig): Promise<void> {
  const box = el<HTMLDivElement>("validation");
  try {
    const result = await api.validate(cfg);
    lastValidation = result;
    const lines = [
      ...result.errors.map((e) => `<div class="err">error: ${e}</div>`),
      ...result.warnings.map((w) => `<div class="warn">warning: ${w}</div>`),
    ];
    box.innerHTML = result.ok
      ? `<div class="ok">configuration ok</div>` + lines.join("")
      : lines.join("");
    el<HTMLButtonElement>("submit").disabled = !result.ok;
  } catch (e) {
    lastValidation = null;
    box.innerHTML = `<div class="err">server unreachable: ${String(e)}</div>`;
    el<HTMLButtonElement>("submit").disabled = true;
  }
}

async function submitRun(): Promise<void> {
  if (!lastValidation?.ok) return;
  const cfg = configFromForm(formState);
  const program = selectedBenchmark(formState);
  const label = `${cfg.cores.length}x ${cfg.cores[0].variant} / ${program.slice(6)}`;
  try {
    const id = await api.submitRun(cfg, program);
    store.add(id, label, cfg);
    void pollRun(id);
  } catch (e) {
    const msg = e instanceof ApiError ? e.message : String(e);
    el<HTMLDivElement>("validation").innerHTML = `<div class="err">${msg}</div>`;
  }
}

async function pollRun(id: string): Promise<void> {
  try {
    const info = await api.waitRun(id);
    store.update(id, info);
  } catch (e) {
    store.markRetryable(id, e instanceof Error ? e.message : String(e));
  }
}

function renderRuns(): void {
  const host = el<HTMLDivElement>("runs");
  host.innerHTML = "";
  for (const card of store.all()) {
    host.appendChild(renderCard(card));
  }
  renderComparison();
}

function renderCard(card: RunCard): HTMLElement {
  const div = document.createElement("div");
  div.className = `card ${card.status}`;
  const title = document.createElement("h3");
  title.textContent = `${card.label} [${card.status}]${card.baseline ? " (baseline)" : ""}`;
  div.appendChild(title);
  if (card.error) {
    const err = document.createElement("div");
    err.className = "err";
    err.textContent = card.error;
    div.appendChild(err);
    if (card.status === "retryable") {
      const retry = document.createElement("button");
      retry.textContent = "retry polling";
      retry.addEventListener("click", () => void pollRun(card.id));
      div.appendChild(retry);
    }
  }
  if (card.report) {
    const table = document.createElement("table");
    for (const [k, v] of reportMetrics(card.report)) {
      const tr = document.createElement("tr");
      tr.innerHTML = `<td>${k}</td><td>${v}</td>`;
      table.appendChild(tr);
    }
    div.appendChild(table);
    const pin = document.createElement("button");
    pin.textContent = "pin as baseline";
    pin.addEventListener("click", () => store.setBaseline(card.id));
    div.appendChild(pin);
  }
  return div;
}

function renderComparison(): void {
  const host = el<HTMLDivElement>("comparison");
  const done = store.completed();
  if (done.length < 2) {
    host.innerHTML = "<p class='small'>run two or more configurations to compare</p>";
    return;
  }
  const base = store.baseline() ?? done[done.length - 1];
  const entries = done.map((c) => ({
    label: c.label,
    value: c.report!.cycles,
    highlight: c.id === base.id,
  }));
  const ratio = speedups(base.report!.cycles, done.map((c) => ({
    label: c.label,
    cycles: c.report!.cycles,
  })));
  const rows = ratio
    .map((r) => `<tr><td>${r.label}</td><td>${r.speedup.toFixed(3)}x</td></tr>`)
    .join("");
  host.innerHTML =
    barChartSvg(entries, "cycles (lower is better)") +
    `<table><tr><th>run</th><th>speedup vs baseline</th></tr>${rows}</table>`;
}

function loadSample(): void {
  formState = fourCoreSampleState();
  renderForm();
  onConfigEdited();
}

function start(): void {
  renderForm();
  store.subscribe(renderRuns);
  el<HTMLButtonElement>("submit").addEventListener("click", () => void submitRun());
  el<HTMLButtonElement>("load-sample").addEventListener("click", loadSample);
  onConfigEdited();
  renderRuns();
}

document.addEventListener("DOMContentLoaded", start);
