/** Shared test doubles: a request-logging fetch and canned service payloads. */

import type { ParetoFront, Scenario, StrategyOutcome } from "../src/types";

export interface LoggedRequest {
  url: string;
  method: string;
  body: unknown;
}

export type Route = (url: string, init?: RequestInit) => { status?: number; body: unknown };

/** Fetch double that records every request and serves canned responses. */
export function fakeFetch(route: Route): { fetchImpl: typeof fetch; log: LoggedRequest[] } {
  const log: LoggedRequest[] = [];
  const fetchImpl = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    log.push({
      url,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(String(init.body)) : null,
    });
    const { status = 200, body } = route(url, init);
    return {
      ok: status >= 200 && status < 300,
      status,
      statusText: String(status),
      json: async () => body,
    } as Response;
  }) as typeof fetch;
  return { fetchImpl, log };
}

export function outcomePayload(overrides: Partial<StrategyOutcome> = {}): StrategyOutcome {
  return {
    total_deaths: 19.9417,
    mobility_auc_mean: -4128.25,
    peak_critical: 10.27,
    feasible: true,
    rt_series: [1.31, 1.28, 1.24, 1.19, 1.13],
    start_date: "2020-04-30",
    trajectory: {
      start_date: "2020-04-30",
      population: 626000,
      states: [
        [0.9995, 0.0001, 0.0002, 0.00008, 0.00002, 0.0, 0.0001],
        [0.9994, 0.00012, 0.00019, 0.00009, 0.00002, 0.00008, 0.0001],
        [0.9993, 0.00013, 0.00018, 0.0001, 0.00003, 0.00016, 0.00011],
        [0.9992, 0.00014, 0.00017, 0.00011, 0.00003, 0.00024, 0.00011],
        [0.9991, 0.00015, 0.00016, 0.00012, 0.00004, 0.00032, 0.00012],
        [0.999, 0.00016, 0.00015, 0.00013, 0.00004, 0.0004, 0.00012],
      ],
    },
    ...overrides,
  };
}

export function frontPayload(): ParetoFront {
  const genome = (seed: number) =>
    Array.from({ length: 66 }, (_, i) => ((seed * 37 + i * 13) % 101) as number);
  return {
    feasible_found: true,
    hypervolume_log: [0.0, 1.5, 2.0],
    solutions: [
      { genome: genome(1), objectives: [25.0, 5000.0], constraint_violation: 0, feasible: true },
      { genome: genome(2), objectives: [12.0, 9000.0], constraint_violation: 0, feasible: true },
      { genome: genome(3), objectives: [18.0, 7000.0], constraint_violation: 0, feasible: true },
    ],
  };
}

export function scenarioPayload(id: string, name: string, deaths: number): Scenario {
  return {
    id,
    name,
    country: "LU",
    schedule: {
      country: "LU",
      start_date: "2020-04-30",
      end_date: "2020-09-30",
      period_days: 14,
      levels: Array.from({ length: 6 }, () => new Array(11).fill(40)),
    },
    outcome: outcomePayload({ total_deaths: deaths }),
    created_at: "2020-05-01T00:00:00Z",
    updated_at: "2020-05-01T00:00:00Z",
  };
}
