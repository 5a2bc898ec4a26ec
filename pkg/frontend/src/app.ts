// DOM wiring for the scalar-selection cockpit.
// All numbers on screen come from server documents; this file only routes
// clicks to API calls and documents to panels.

import { ApiClient, ApiError } from "./api.js";
import { renderEmptyState, renderEquatorView } from "./chart.js";
import { fmt, fmtKappa } from "./format.js";
import {
  applyProcedureDoc,
  canCommit,
  canRunPhase,
  canTry,
  CockpitState,
  initialState,
  latestTrial,
  Scenario,
  selectUnit,
  setOverride,
  setSlider,
  sliderBounds,
  withinBounds,
} from "./state.js";
import type { DatasetDoc, EfficiencyReport, RankRow } from "./types.js";

const api = new ApiClient("");
let state: CockpitState = initialState();
let dataset: DatasetDoc | null = null;

const $ = (id: string) => document.getElementById(id) as HTMLElement;
const banner = () => $("banner");

function showBanner(kind: "info" | "error" | "conflict", text: string): void {
  banner().className = `banner banner-${kind}`;
  banner().textContent = text;
  banner().style.display = text ? "block" : "none";
}

function clearBanner(): void {
  banner().style.display = "none";
}

async function loadUnits(): Promise<void> {
  const rank = await api.rank();
  const select = $("unit") as HTMLSelectElement;
  select.innerHTML = "";
  rank.rows.forEach((row: RankRow) => {
    const opt = document.createElement("option");
    opt.value = row.dmu;
    opt.textContent = `${row.dmu} (${row.class}, score ${fmt(row.score, 3)})`;
    opt.dataset.class = row.class;
    select.appendChild(opt);
  });
  const first = rank.rows[0];
  if (first) {
    select.value = first.dmu;
    await chooseUnit(first.dmu, first.class === "efficient" ? "super-efficiency" : "inefficiency");
  }
}

async function chooseUnit(dmu: string, scenario: Scenario): Promise<void> {
  state = selectUnit(state, dmu, scenario);
  ($("scenario") as HTMLSelectElement).value = scenario;
  clearBanner();
  try {
    const doc = await api.procedure(dmu);
    if (doc.scenario === scenario) {
      state = applyProcedureDoc(state, doc);   // restore a saved session
    }
  } catch (err) {
    if (!(err instanceof ApiError && err.status === 404)) throw err;
  }
  await refreshAll();
}

async function runPhase(phase: 1 | 2 | 3): Promise<void> {
  if (!state.dmu) return;
  clearBanner();
  try {
    const doc = await api.phase(state.dmu, phase, state.scenario);
    state = applyProcedureDoc(state, doc);
  } catch (err) {
    handleApiError(err);
  }
  await refreshAll();
}

async function tryCurrent(): Promise<void> {
  if (!state.dmu || state.slider === null) return;
  clearBanner();
  const kappa = state.slider;
  if (!state.override && !withinBounds(state, kappa)) {
    showBanner("error", "scalar outside the phase-3 bracket; enable override to explore");
    return;
  }
  try {
    const doc = await api.tryScalar(state.dmu, kappa, state.override);
    state = applyProcedureDoc(state, doc);
  } catch (err) {
    handleApiError(err);
  }
  await refreshAll();
}

async function commitCurrent(): Promise<void> {
  if (!state.dmu) return;
  const last = latestTrial(state);
  if (!last) return;
  clearBanner();
  try {
    const doc = await api.commit(state.dmu, last.kappa);
    state = applyProcedureDoc(state, doc);
    showBanner("info", `final scalar ${fmtKappa(doc.final_kappa)} committed; benchmarks frozen`);
  } catch (err) {
    handleApiError(err);
  }
  await refreshAll();
}

function handleApiError(err: unknown): void {
  if (err instanceof ApiError) {
    if (err.status === 409) {
      showBanner("conflict", `another writer holds this unit's session: ${err.message}`);
    } else if (err.status === 422) {
      $("chart").innerHTML = renderEmptyState(`no solution at this scalar: ${err.message}`);
      showBanner("error", err.message);
    } else {
      showBanner("error", err.message);
    }
  } else {
    showBanner("error", String(err));
  }
}

function criterionLabels(): { inputs: string[]; outputs: string[] } {
  if (!dataset) return { inputs: [], outputs: [] };
  return {
    inputs: dataset.inputs.map((c) => (c.unit ? `${c.label} [${c.unit}]` : c.label)),
    outputs: dataset.outputs.map((c) => (c.unit ? `${c.label} [${c.unit}]` : c.label)),
  };
}

function renderPhasePanel(): void {
  for (const phase of [1, 2, 3] as const) {
    const button = $(`phase${phase}`) as HTMLButtonElement;
    button.disabled = !canRunPhase(state, phase);
    button.classList.toggle("done", state.phase >= phase);
  }
  $("phase-status").textContent = state.directive
    ? state.directive
    : state.phase === 0
      ? "run phase 1 to classify the unit"
      : `phase ${state.phase} complete` +
        (state.kappa1 !== null ? ` - first scalar ${fmtKappa(state.kappa1)}` : "") +
        (state.kappa2 !== null ? `, second scalar ${fmtKappa(state.kappa2)}` : "");
}

function renderSlider(): void {
  const bounds = sliderBounds(state);
  const slider = $("kappa-slider") as HTMLInputElement;
  const numeric = $("kappa-value") as HTMLInputElement;
  const tryButton = $("try") as HTMLButtonElement;
  const enabled = canTry(state) && bounds !== null;
  slider.disabled = !enabled;
  numeric.disabled = !enabled;
  tryButton.disabled = !enabled;
  if (bounds) {
    slider.min = String(bounds.min);
    slider.max = String(bounds.max);
    slider.step = String((bounds.max - bounds.min) / 1000 || 0.001);
    const value = state.slider ?? bounds.suggestion;
    slider.value = String(value);
    numeric.value = value.toFixed(4);
    $("bracket").textContent =
      `bracket [${fmtKappa(bounds.min)}, ${fmtKappa(bounds.max)}] - ` +
      `midpoint suggestion ${fmtKappa(bounds.suggestion)}`;
  } else {
    $("bracket").textContent = "bracket available after phase 3";
  }
  ($("override") as HTMLInputElement).checked = state.override;
}

function reportRows(report: EfficiencyReport): [string, string][] {
  return [
    ["efficiency E", fmt(report.efficiency)],
    ["return-to-virtual-scale", fmt(report.rtvs)],
    ["adjustment price", fmt(report.adjustment_price)],
    ["goal price", fmt(report.tau)],
    ["input share of the scalar", fmt(report.gamma)],
    ["scalar value", fmt(report.omega)],
    ["reference peers", report.reference.join(", ") || "-"],
  ];
}

function renderReadouts(): void {
  const last = latestTrial(state);
  const summary = $("summary");
  if (!last) {
    summary.innerHTML = "<p class='muted'>no trials yet</p>";
    $("ratios").innerHTML = "";
    $("benchmarks").innerHTML = "";
    return;
  }
  const rep = last.report;
  summary.innerHTML =
    `<h3>trial at scalar ${fmtKappa(last.kappa)}</h3>` +
    "<table>" +
    reportRows(rep).map(([k, v]) => `<tr><th>${k}</th><td>${v}</td></tr>`).join("") +
    "</table>";

  const labels = criterionLabels();
  const ratioRows = [
    ...rep.input_ratios.map((q, i) =>
      `<tr><td>${labels.inputs[i] ?? `input ${i + 1}`}</td><td>input</td><td>${fmt(q)}</td></tr>`),
    ...rep.output_ratios.map((p, r) =>
      `<tr><td>${labels.outputs[r] ?? `output ${r + 1}`}</td><td>output</td><td>${fmt(p)}</td></tr>`),
  ].join("");
  $("ratios").innerHTML =
    `<h3>adjustment ratios</h3><table><tr><th>criterion</th><th>side</th><th>ratio</th></tr>${ratioRows}</table>`;

  const frozen = state.complete && state.finalKappa !== null;
  const benchRows = [
    ...rep.benchmark_inputs.map((v, i) =>
      `<tr><td>${labels.inputs[i] ?? `input ${i + 1}`}</td><td>${fmt(v, 3)}</td></tr>`),
    ...rep.benchmark_outputs.map((v, r) =>
      `<tr><td>${labels.outputs[r] ?? `output ${r + 1}`}</td><td>${fmt(v, 3)}</td></tr>`),
  ].join("");
  $("benchmarks").innerHTML =
    `<h3>benchmarks${frozen ? " (committed)" : ""}</h3>` +
    `<table class="${frozen ? "frozen" : ""}"><tr><th>criterion</th><th>target</th></tr>${benchRows}</table>`;
}

function renderHistory(): void {
  const rows = state.trials
    .map(
      (t, i) =>
        `<tr><td>${i + 1}</td><td>${fmtKappa(t.kappa)}</td>` +
        `<td>${fmt(t.report.efficiency)}</td><td>${fmt(t.report.rtvs)}</td></tr>`,
    )
    .join("");
  $("history").innerHTML =
    "<table><tr><th>#</th><th>scalar</th><th>E</th><th>RTvS</th></tr>" +
    (rows || "<tr><td colspan='4' class='muted'>empty</td></tr>") +
    "</table>";
  const commit = $("commit") as HTMLButtonElement;
  commit.disabled = !canCommit(state);
  $("committed").textContent = state.complete && state.finalKappa !== null
    ? `committed final scalar: ${fmtKappa(state.finalKappa)}`
    : "";
}

async function renderChart(): Promise<void> {
  const chart = $("chart");
  if (!state.dmu) {
    chart.innerHTML = renderEmptyState("select a unit");
    return;
  }
  const last = latestTrial(state);
  const scalarModel = state.scenario === "super-efficiency" ? "stsc" : "tsc";
  const plainModel = state.scenario === "super-efficiency" ? "spt" : "pt";
  try {
    const geometry = last
      ? await api.plot(state.dmu, scalarModel, last.kappa)
      : state.phase >= 1
        ? await api.plot(state.dmu, plainModel)
        : null;
    chart.innerHTML = geometry ? renderEquatorView(geometry) : renderEmptyState("run phase 1");
  } catch (err) {
    if (err instanceof ApiError && err.status === 422) {
      chart.innerHTML = renderEmptyState(`no solution at this scalar: ${err.message}`);
    } else {
      throw err;
    }
  }
}

async function refreshAll(): Promise<void> {
  renderPhasePanel();
  renderSlider();
  renderReadouts();
  renderHistory();
  await renderChart();
}

async function boot(): Promise<void> {
  await api.health();
  const rank = await api.rank();
  const anyUnit = rank.rows[0];
  if (anyUnit) {
    const proc = await api
      .procedure(anyUnit.dmu)
      .catch(() => null);
    if (proc) dataset = await api.dataset(proc.dataset_hash).catch(() => null);
  }
  ($("scenario") as HTMLSelectElement).addEventListener("change", (ev) => {
    const scenario = (ev.target as HTMLSelectElement).value as Scenario;
    if (state.dmu) void chooseUnit(state.dmu, scenario);
  });
  ($("unit") as HTMLSelectElement).addEventListener("change", (ev) => {
    const select = ev.target as HTMLSelectElement;
    const cls = select.selectedOptions[0]?.dataset.class;
    void chooseUnit(select.value, cls === "efficient" ? "super-efficiency" : "inefficiency");
  });
  $("phase1").addEventListener("click", () => void runPhase(1));
  $("phase2").addEventListener("click", () => void runPhase(2));
  $("phase3").addEventListener("click", () => void runPhase(3));
  $("try").addEventListener("click", () => void tryCurrent());
  $("commit").addEventListener("click", () => void commitCurrent());
  ($("kappa-slider") as HTMLInputElement).addEventListener("input", (ev) => {
    state = setSlider(state, Number((ev.target as HTMLInputElement).value));
    ($("kappa-value") as HTMLInputElement).value = Number(
      (ev.target as HTMLInputElement).value,
    ).toFixed(4);
  });
  ($("kappa-value") as HTMLInputElement).addEventListener("change", (ev) => {
    const value = Number((ev.target as HTMLInputElement).value);
    if (Number.isFinite(value)) state = setSlider(state, value);
  });
  ($("override") as HTMLInputElement).addEventListener("change", (ev) => {
    state = setOverride(state, (ev.target as HTMLInputElement).checked);
  });
  await loadUnits();
}

if (typeof document !== "undefined" && document.getElementById("cockpit")) {
  void boot().catch((err) => showBanner("error", String(err)));
}
