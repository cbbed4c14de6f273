/** Pareto-front bookkeeping: scatter points and the three quick-picks.
 * S1 = lowest death toll, S2 = median death toll, S3 = most mobility. */

import type { ParetoFront, ParetoSolution } from "./types";

export interface FrontPoint {
  index: number;
  deaths: number;
  /** Mean mobility AUC (≤ 0; closer to 0 means more mobility). */
  mobilityAuc: number;
  solution: ParetoSolution;
}

export function frontPoints(front: ParetoFront): FrontPoint[] {
  return front.solutions.map((solution, index) => ({
    index,
    deaths: solution.objectives[0],
    mobilityAuc: -solution.objectives[1],
    solution,
  }));
}

function requireNonEmpty(points: FrontPoint[]): void {
  if (points.length === 0) {
    throw new Error("empty front: no feasible solutions to pick from");
  }
}

/** S1: the solution with the lowest death toll. */
export function pickS1(points: FrontPoint[]): FrontPoint {
  requireNonEmpty(points);
  return points.reduce((best, p) => (p.deaths < best.deaths ? p : best));
}

/** S2: the solution with the median death toll (lower middle for even n). */
export function pickS2(points: FrontPoint[]): FrontPoint {
  requireNonEmpty(points);
  const byDeaths = [...points].sort((a, b) => a.deaths - b.deaths);
  return byDeaths[Math.floor((byDeaths.length - 1) / 2)];
}

/** S3: the solution with the most mobility (AUC closest to 0). */
export function pickS3(points: FrontPoint[]): FrontPoint {
  requireNonEmpty(points);
  return points.reduce((best, p) => (p.mobilityAuc > best.mobilityAuc ? p : best));
}

export const QUICK_PICKS = { S1: pickS1, S2: pickS2, S3: pickS3 } as const;
