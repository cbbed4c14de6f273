/** Payload shapes published by the exitsim HTTP service under /api/v1. */

export interface PolicySchedule {
  country: string;
  start_date: string;
  end_date: string;
  period_days: number;
  levels: number[][];
}

export interface Trajectory {
  start_date: string;
  population: number;
  /** One row per day (including the start), columns S,E,I,H,C,Rec,D. */
  states: number[][];
}

export interface StrategyOutcome {
  total_deaths: number;
  mobility_auc_mean: number;
  peak_critical: number;
  feasible: boolean;
  rt_series: number[];
  start_date: string;
  trajectory: Trajectory;
}

export interface ParetoSolution {
  genome: number[];
  /** (deaths, negated mobility AUC), both minimized. */
  objectives: [number, number];
  constraint_violation: number;
  feasible: boolean;
}

export interface ParetoFront {
  solutions: ParetoSolution[];
  hypervolume_log: number[];
  feasible_found: boolean;
  id?: string;
  country?: string;
}

export type JobStatus = "queued" | "running" | "done" | "failed";

export interface Job {
  id: string;
  kind: string;
  status: JobStatus;
  progress: number;
  result_ref: string | null;
  error: string | null;
}

export interface Attribution {
  feature_names: string[];
  phi: number[];
  base_value: number;
  prediction: number;
  std_errors: number[] | null;
}

export interface Scenario {
  id: string;
  name: string;
  country: string;
  schedule: PolicySchedule;
  outcome: StrategyOutcome | null;
  created_at: string;
  updated_at: string;
}

export interface ScenarioPage {
  items: Scenario[];
  total: number;
  limit: number;
  offset: number;
}

export const COMPARTMENT_NAMES = [
  "susceptible",
  "exposed",
  "infectious",
  "hospitalized",
  "critical",
  "recovered",
  "dead",
] as const;
