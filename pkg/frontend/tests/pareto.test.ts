import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { App } from "../src/app";
import { frontPoints, pickS1, pickS2, pickS3 } from "../src/pareto";
import type { Job } from "../src/types";
import { fakeFetch, frontPayload } from "./helpers";

function mount(): HTMLElement {
  document.body.innerHTML = '<div id="app"></div>';
  return document.getElementById("app")!;
}

describe("front points and quick-picks", () => {
  const points = frontPoints(frontPayload());

  it("maps objectives to (deaths, mobility AUC)", () => {
    expect(points[0].deaths).toBe(25.0);
    expect(points[0].mobilityAuc).toBe(-5000.0);
  });

  it("S1 selects the minimum-deaths solution", () => {
    expect(pickS1(points).index).toBe(1); // deaths 12 < 18 < 25
  });

  it("S2 selects the median-deaths solution", () => {
    expect(pickS2(points).index).toBe(2); // deaths 18 is the middle value
  });

  it("S3 selects the most-mobility solution", () => {
    expect(pickS3(points).index).toBe(0); // AUC -5000 is closest to zero
  });

  it("all picks coincide on a front of one", () => {
    const single = points.slice(0, 1);
    expect(pickS1(single)).toBe(single[0]);
    expect(pickS2(single)).toBe(single[0]);
    expect(pickS3(single)).toBe(single[0]);
  });

  it("picks reject an empty front", () => {
    expect(() => pickS1([])).toThrow(/empty front/);
  });
});

describe("pareto explorer", () => {
  beforeEach(mount);

  it("clicking a point loads its exact genome into the editor", () => {
    const front = frontPayload();
    const { fetchImpl } = fakeFetch(() => ({ body: {} }));
    const app = new App(new ApiClient("/api/v1", fetchImpl), document.getElementById("app")!);
    app.showFront(front);

    const dot = document.querySelector<SVGCircleElement>('.pareto-point[data-index="1"]')!;
    dot.dispatchEvent(new Event("click"));
    expect(app.editor.levels.flat()).toEqual(front.solutions[1].genome);
  });

  it("renders an empty-front message when nothing is feasible", () => {
    const { fetchImpl } = fakeFetch(() => ({ body: {} }));
    const app = new App(new ApiClient("/api/v1", fetchImpl), document.getElementById("app")!);
    app.showFront({ solutions: [], hypervolume_log: [], feasible_found: false });
    expect(document.querySelector(".empty-front")).not.toBeNull();
  });

  it("optimize round-trip: start job, poll, fetch and render the front", async () => {
    const front = frontPayload();
    const job: Job = {
      id: "j1",
      kind: "optimize",
      status: "queued",
      progress: 0,
      result_ref: null,
      error: null,
    };
    const { fetchImpl, log } = fakeFetch((url) => {
      if (url === "/api/v1/optimize") {
        return { status: 202, body: job };
      }
      if (url === "/api/v1/jobs/j1") {
        return {
          body: { ...job, status: "done", progress: 1, result_ref: "/api/v1/fronts/j1" },
        };
      }
      if (url === "/api/v1/fronts/j1") {
        return { body: front };
      }
      throw new Error(`unexpected ${url}`);
    });
    const app = new App(new ApiClient("/api/v1", fetchImpl), document.getElementById("app")!);
    await app.runOptimize(10, 5, 0);
    expect(log.map((r) => r.url)).toContain("/api/v1/fronts/j1");
    expect(document.querySelectorAll(".pareto-point")).toHaveLength(front.solutions.length);
  });
});
