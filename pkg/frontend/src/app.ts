/** Application shell: wires the editor, service client, and views into a
 * single edit-and-simulate loop with latest-wins request handling. */

import { ApiClient, ApiError } from "./api";
import { CannedKind, ScheduleEditor, cannedLevels } from "./editor";
import { FrontPoint, frontPoints } from "./pareto";
import type { ParetoFront, Scenario, StrategyOutcome } from "./types";
import {
  renderAttribution,
  renderComparisonTable,
  renderEditorGrid,
  renderOutcome,
  renderParetoScatter,
} from "./views";

export interface AppOptions {
  country?: string;
  icuCapacity?: number;
  /** Baseline restriction levels used by the canned strategies. */
  currentLevels?: number[];
}

export class App {
  readonly editor: ScheduleEditor;
  private readonly icuCapacity?: number;
  private readonly currentLevels: number[];
  private simulateToken = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
    options: AppOptions = {}
  ) {
    this.editor = new ScheduleEditor(options.country ?? "LU");
    this.icuCapacity = options.icuCapacity;
    this.currentLevels = options.currentLevels ?? [40, 40, 40, 40, 40, 40];
    this.renderEditor();
  }

  private section(className: string): HTMLElement {
    let node = this.root.querySelector<HTMLElement>(`.${className}-slot`);
    if (node === null) {
      node = document.createElement("div");
      node.className = `${className}-slot`;
      this.root.appendChild(node);
    }
    return node;
  }

  renderEditor(): void {
    const slot = this.section("editor");
    slot.replaceChildren(renderEditorGrid(this.editor, () => void this.simulate()));
  }

  loadCanned(kind: CannedKind): void {
    this.editor.setLevels(cannedLevels(kind, this.currentLevels));
    this.renderEditor();
  }

  /** POST /simulate for the current grid; stale responses are dropped so
   * the charts always reflect the most recent edit. */
  async simulate(): Promise<StrategyOutcome | null> {
    const token = ++this.simulateToken;
    try {
      const outcome = await this.api.simulate(this.editor.country, this.editor.toSchedule());
      if (token !== this.simulateToken) {
        return null; // a newer edit is already in flight
      }
      this.editor.lastOutcome = outcome;
      this.section("outcome").replaceChildren(renderOutcome(outcome, this.icuCapacity));
      return outcome;
    } catch (error) {
      if (token === this.simulateToken) {
        this.showError(error);
      }
      return null;
    }
  }

  showFront(front: ParetoFront): void {
    const points = frontPoints(front);
    this.section("pareto").replaceChildren(
      renderParetoScatter(points, (point) => this.selectFrontPoint(point))
    );
  }

  selectFrontPoint(point: FrontPoint): void {
    this.editor.loadGenome(point.solution.genome);
    this.renderEditor();
  }

  async runOptimize(populationSize = 100, generations = 100, seed = 0): Promise<void> {
    const job = await this.api.startOptimize(
      this.editor.country,
      populationSize,
      generations,
      seed
    );
    const done = await this.api.pollJob(job.id);
    if (done.status === "failed" || done.result_ref === null) {
      this.showError(new Error(done.error ?? "optimization failed"));
      return;
    }
    this.showFront(await this.api.getFront(done.result_ref));
  }

  async refreshScenarios(): Promise<Scenario[]> {
    const page = await this.api.listScenarios(this.editor.country);
    this.section("comparison").replaceChildren(
      renderComparisonTable(page.items, (scenario) => {
        void this.api.deleteScenario(scenario.id).catch((error) => this.showError(error));
      })
    );
    return page.items;
  }

  async explain(date: string, seed = 0): Promise<void> {
    const attribution = await this.api.explain(this.editor.country, date, seed);
    this.section("attribution").replaceChildren(renderAttribution(attribution));
  }

  showError(error: unknown): void {
    const toast = document.createElement("p");
    toast.className = "toast error";
    toast.textContent =
      error instanceof ApiError ? error.detail : error instanceof Error ? error.message : "error";
    this.section("toast").replaceChildren(toast);
  }
}
