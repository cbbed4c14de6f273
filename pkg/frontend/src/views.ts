/** DOM views. Every number shown is read straight off a service payload;
 * nothing is recomputed client-side. */

import { renderLineChart } from "./charts";
import { CATEGORY_NAMES, N_CATEGORIES, N_PERIODS, ScheduleEditor, clampLevel } from "./editor";
import type { FrontPoint } from "./pareto";
import type { Attribution, Scenario, StrategyOutcome } from "./types";
import { COMPARTMENT_NAMES } from "./types";

const COMPARTMENT_COLORS = [
  "#4477aa",
  "#66ccee",
  "#ee6677",
  "#ccbb44",
  "#aa3377",
  "#228833",
  "#222222",
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

// ------------------------------------------------------------------- editor

export function renderEditorGrid(
  editor: ScheduleEditor,
  onChange: () => void
): HTMLTableElement {
  const table = el("table", "editor-grid");
  const head = table.createTHead().insertRow();
  head.appendChild(el("th", undefined, "category"));
  for (let p = 0; p < N_PERIODS; p++) {
    head.appendChild(el("th", undefined, `P${p}`));
  }
  const body = table.createTBody();
  for (let c = 0; c < N_CATEGORIES; c++) {
    const row = body.insertRow();
    row.appendChild(el("th", undefined, CATEGORY_NAMES[c]));
    for (let p = 0; p < N_PERIODS; p++) {
      const cell = row.insertCell();
      const slider = el("input", "level-slider");
      slider.type = "range";
      slider.min = "0";
      slider.max = "100";
      slider.step = "1";
      slider.value = String(editor.levels[c][p]);
      slider.dataset.category = String(c);
      slider.dataset.period = String(p);
      slider.addEventListener("input", () => {
        editor.setLevel(c, p, clampLevel(Number(slider.value)));
        onChange();
      });
      cell.appendChild(slider);
    }
  }
  return table;
}

export function sliderValues(grid: HTMLTableElement): number[][] {
  const levels: number[][] = Array.from({ length: N_CATEGORIES }, () => []);
  grid.querySelectorAll<HTMLInputElement>("input.level-slider").forEach((slider) => {
    levels[Number(slider.dataset.category)][Number(slider.dataset.period)] = Number(
      slider.value
    );
  });
  return levels;
}

// ------------------------------------------------------------------ outcome

export function renderOutcome(outcome: StrategyOutcome, icuCapacity?: number): HTMLElement {
  const root = el("section", "outcome");

  const deaths = el("p", "deaths-counter");
  deaths.dataset.value = String(outcome.total_deaths);
  deaths.textContent = `deaths: ${outcome.total_deaths}`;
  root.appendChild(deaths);

  const feasible = el(
    "p",
    outcome.feasible ? "feasibility ok" : "feasibility exceeded",
    outcome.feasible ? "ICU load within capacity" : "ICU capacity exceeded"
  );
  feasible.dataset.feasible = String(outcome.feasible);
  root.appendChild(feasible);

  const states = outcome.trajectory.states;
  const trajectoryChart = renderLineChart(
    COMPARTMENT_NAMES.map((label, j) => ({
      label,
      values: states.map((row) => row[j]),
      color: COMPARTMENT_COLORS[j],
    })),
    { title: "compartment trajectories" }
  );
  trajectoryChart.classList.add("trajectory-chart");
  root.appendChild(trajectoryChart);

  const criticalChart = renderLineChart(
    [
      {
        label: "critical",
        values: states.map((row) => row[4] * outcome.trajectory.population),
        color: "#aa3377",
      },
    ],
    { title: "critical care load", threshold: icuCapacity, thresholdLabel: "ICU capacity" }
  );
  criticalChart.classList.add("critical-chart");
  if (!outcome.feasible) {
    criticalChart.classList.add("capacity-exceeded");
  }
  root.appendChild(criticalChart);

  const rtChart = renderLineChart(
    [{ label: "R_t", values: outcome.rt_series, color: "#4477aa" }],
    { title: "reproduction number" }
  );
  rtChart.classList.add("rt-chart");
  root.appendChild(rtChart);

  return root;
}

// ------------------------------------------------------------------- pareto

export function renderParetoScatter(
  points: FrontPoint[],
  onSelect: (point: FrontPoint) => void
): HTMLElement {
  const root = el("section", "pareto");
  if (points.length === 0) {
    root.appendChild(el("p", "empty-front", "no feasible solutions found"));
    return root;
  }
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", "0 0 640 240");
  svg.classList.add("pareto-scatter");
  const xs = points.map((p) => p.deaths);
  const ys = points.map((p) => p.mobilityAuc);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  for (const point of points) {
    const dot = document.createElementNS("http://www.w3.org/2000/svg", "circle");
    dot.classList.add("pareto-point");
    dot.setAttribute("r", "5");
    dot.setAttribute("cx", String(20 + ((point.deaths - x0) / (x1 - x0 || 1)) * 600));
    dot.setAttribute("cy", String(220 - ((point.mobilityAuc - y0) / (y1 - y0 || 1)) * 200));
    dot.dataset.index = String(point.index);
    dot.addEventListener("click", () => onSelect(point));
    svg.appendChild(dot);
  }
  root.appendChild(svg);
  return root;
}

// --------------------------------------------------------------- comparison

export type ScenarioColumn = "name" | "deaths" | "auc" | "peak" | "feasible";

function columnValue(scenario: Scenario, column: ScenarioColumn): number | string {
  const outcome = scenario.outcome;
  switch (column) {
    case "name":
      return scenario.name;
    case "deaths":
      return outcome ? outcome.total_deaths : NaN;
    case "auc":
      return outcome ? outcome.mobility_auc_mean : NaN;
    case "peak":
      return outcome ? outcome.peak_critical : NaN;
    case "feasible":
      return outcome ? String(outcome.feasible) : "";
  }
}

export function renderComparisonTable(
  scenarios: Scenario[],
  onDelete: (scenario: Scenario) => void,
  sortBy: ScenarioColumn = "name"
): HTMLTableElement {
  const table = el("table", "comparison");
  const head = table.createTHead().insertRow();
  const columns: ScenarioColumn[] = ["name", "deaths", "auc", "peak", "feasible"];
  for (const column of columns) {
    const th = el("th", undefined, column);
    th.dataset.column = column;
    head.appendChild(th);
  }
  head.appendChild(el("th", undefined, ""));

  const ordered = [...scenarios].sort((a, b) => {
    const [va, vb] = [columnValue(a, sortBy), columnValue(b, sortBy)];
    return va < vb ? -1 : va > vb ? 1 : 0;
  });
  const body = table.createTBody();
  for (const scenario of ordered) {
    const row = body.insertRow();
    row.dataset.id = scenario.id;
    for (const column of columns) {
      row.insertCell().textContent = String(columnValue(scenario, column));
    }
    const remove = el("button", "delete-scenario", "delete");
    remove.addEventListener("click", () => {
      row.remove();
      onDelete(scenario);
    });
    row.insertCell().appendChild(remove);
  }
  return table;
}

// -------------------------------------------------------------- attribution

/** Horizontal bar list ordered by |phi|, largest influence first. */
export function renderAttribution(attribution: Attribution): HTMLElement {
  const root = el("section", "attribution");
  const order = attribution.phi
    .map((phi, index) => ({ phi, index }))
    .sort((a, b) => Math.abs(b.phi) - Math.abs(a.phi) || a.index - b.index);
  const maxAbs = Math.max(...order.map((o) => Math.abs(o.phi)), 1e-12);
  const list = el("ol", "attribution-list");
  for (const { phi, index } of order) {
    const item = el("li", "attribution-row");
    item.dataset.feature = attribution.feature_names[index];
    item.dataset.phi = String(phi);
    const bar = el("span", phi >= 0 ? "bar positive" : "bar negative");
    bar.style.width = `${(Math.abs(phi) / maxAbs) * 100}%`;
    item.appendChild(el("span", "feature-name", attribution.feature_names[index]));
    item.appendChild(bar);
    item.appendChild(el("span", "phi-value", String(phi)));
    list.appendChild(item);
  }
  root.appendChild(list);
  return root;
}
