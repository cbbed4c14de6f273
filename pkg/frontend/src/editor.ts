/** Schedule editor state: a 6x11 slider grid bound to a policy schedule.
 * Values clamp to [0,100]; the grid round-trips losslessly to the
 * schedule JSON the service consumes. */

import type { PolicySchedule, StrategyOutcome } from "./types";

export const N_CATEGORIES = 6;
export const N_PERIODS = 11;
export const GENOME_LENGTH = N_CATEGORIES * N_PERIODS;
export const PROGRESSIVE_STEP = 15;

export const CATEGORY_NAMES = [
  "retail_recreation",
  "grocery_pharmacy",
  "parks",
  "transit_stations",
  "workplaces",
  "residential",
] as const;

export const DEFAULT_START = "2020-04-30";
export const DEFAULT_END = "2020-09-30";
export const DEFAULT_PERIOD_DAYS = 14;

export type CannedKind = "hard" | "progressive" | "cyclic" | "status_quo";

export function clampLevel(value: number): number {
  if (Number.isNaN(value)) {
    return 0;
  }
  return Math.min(100, Math.max(0, value));
}

function zeroGrid(): number[][] {
  return Array.from({ length: N_CATEGORIES }, () => new Array<number>(N_PERIODS).fill(0));
}

function copyGrid(levels: number[][]): number[][] {
  return levels.map((row) => row.slice());
}

/** Restriction ladder stepping down by 15 points per two-week period. */
export function progressiveLadder(
  current: number[],
  step: number = PROGRESSIVE_STEP
): number[][] {
  return current.map((level) =>
    Array.from({ length: N_PERIODS }, (_, p) => clampLevel(level - step * p))
  );
}

/** The four canned strategies, derived from the current restriction levels. */
export function cannedLevels(kind: CannedKind, current: number[]): number[][] {
  if (current.length !== N_CATEGORIES) {
    throw new Error(`expected ${N_CATEGORIES} current levels, got ${current.length}`);
  }
  switch (kind) {
    case "hard":
      return zeroGrid();
    case "progressive":
      return progressiveLadder(current);
    case "cyclic":
      return current.map((level) =>
        Array.from({ length: N_PERIODS }, (_, p) => ([1, 3, 5].includes(p) ? clampLevel(level) : 0))
      );
    case "status_quo":
      return current.map((level) => new Array<number>(N_PERIODS).fill(clampLevel(level)));
  }
}

export class ScheduleEditor {
  levels: number[][] = zeroGrid();
  dirty = false;
  lastOutcome: StrategyOutcome | null = null;
  startDate = DEFAULT_START;
  endDate = DEFAULT_END;
  periodDays = DEFAULT_PERIOD_DAYS;

  constructor(public country: string) {}

  setLevel(category: number, period: number, value: number): void {
    if (category < 0 || category >= N_CATEGORIES || period < 0 || period >= N_PERIODS) {
      throw new Error(`no slider at [${category}][${period}]`);
    }
    this.levels[category][period] = clampLevel(value);
    this.dirty = true;
  }

  /** Replace the whole grid (canned strategy or Pareto pick). */
  setLevels(levels: number[][]): void {
    if (levels.length !== N_CATEGORIES || levels.some((r) => r.length !== N_PERIODS)) {
      throw new Error(`levels must be ${N_CATEGORIES}x${N_PERIODS}`);
    }
    this.levels = levels.map((row) => row.map(clampLevel));
    this.dirty = true;
  }

  /** Load a flat 66-gene Pareto genome, row-major by category. */
  loadGenome(genome: number[]): void {
    if (genome.length !== GENOME_LENGTH) {
      throw new Error(`genome must have ${GENOME_LENGTH} genes, got ${genome.length}`);
    }
    const levels = zeroGrid();
    for (let c = 0; c < N_CATEGORIES; c++) {
      for (let p = 0; p < N_PERIODS; p++) {
        levels[c][p] = genome[c * N_PERIODS + p];
      }
    }
    this.levels = levels;
    this.dirty = true;
  }

  loadSchedule(schedule: PolicySchedule): void {
    this.country = schedule.country;
    this.startDate = schedule.start_date;
    this.endDate = schedule.end_date;
    this.periodDays = schedule.period_days;
    this.levels = copyGrid(schedule.levels);
    this.dirty = false;
  }

  toSchedule(): PolicySchedule {
    return {
      country: this.country,
      start_date: this.startDate,
      end_date: this.endDate,
      period_days: this.periodDays,
      levels: copyGrid(this.levels),
    };
  }
}
