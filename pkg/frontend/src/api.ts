/** Typed client for the exitsim service. The UI computes nothing itself:
 * every displayed number comes back through one of these calls. */

import type {
  Attribution,
  Job,
  ParetoFront,
  PolicySchedule,
  Scenario,
  ScenarioPage,
  StrategyOutcome,
} from "./types";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string
  ) {
    super(`${status}: ${detail}`);
  }
}

export interface PollOptions {
  /** Initial polling interval; backs off geometrically. */
  intervalMs?: number;
  backoff?: number;
  maxIntervalMs?: number;
  /** Injectable for tests with fake timers. */
  sleep?: (ms: number) => Promise<void>;
}

const realSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "/api/v1",
    private readonly fetchImpl: typeof fetch = (...args) => fetch(...args)
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const url = path.startsWith("/api/") ? path : this.baseUrl + path;
    const response = await this.fetchImpl(url, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (response.status === 204) {
      return undefined as T;
    }
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(response.status, String(body.detail ?? response.statusText));
    }
    return body as T;
  }

  simulate(country: string, schedule: PolicySchedule): Promise<StrategyOutcome> {
    return this.request("/simulate", {
      method: "POST",
      body: JSON.stringify({ country, schedule }),
    });
  }

  startOptimize(
    country: string,
    populationSize = 100,
    generations = 100,
    seed = 0
  ): Promise<Job> {
    return this.request("/optimize", {
      method: "POST",
      body: JSON.stringify({
        country,
        population_size: populationSize,
        generations,
        seed,
      }),
    });
  }

  getJob(jobId: string): Promise<Job> {
    return this.request(`/jobs/${jobId}`);
  }

  /** result_ref is an absolute /api/v1 path, fetched verbatim. */
  getFront(resultRef: string): Promise<ParetoFront> {
    return this.request(resultRef);
  }

  /** Poll a job to completion with 1s-and-backoff cadence. */
  async pollJob(jobId: string, options: PollOptions = {}): Promise<Job> {
    const {
      intervalMs = 1000,
      backoff = 1.5,
      maxIntervalMs = 10_000,
      sleep = realSleep,
    } = options;
    let wait = intervalMs;
    for (;;) {
      const job = await this.getJob(jobId);
      if (job.status === "done" || job.status === "failed") {
        return job;
      }
      await sleep(wait);
      wait = Math.min(wait * backoff, maxIntervalMs);
    }
  }

  listScenarios(country?: string, limit = 50, offset = 0): Promise<ScenarioPage> {
    const params = new URLSearchParams({ limit: String(limit), offset: String(offset) });
    if (country !== undefined) {
      params.set("country", country);
    }
    return this.request(`/scenarios?${params}`);
  }

  createScenario(
    name: string,
    country: string,
    schedule: PolicySchedule,
    outcome: StrategyOutcome | null = null
  ): Promise<Scenario> {
    return this.request("/scenarios", {
      method: "POST",
      body: JSON.stringify({ name, country, schedule, outcome }),
    });
  }

  deleteScenario(scenarioId: string): Promise<void> {
    return this.request(`/scenarios/${scenarioId}`, { method: "DELETE" });
  }

  explain(
    country: string,
    date: string,
    seed = 0,
    nPermutations = 2048
  ): Promise<Attribution> {
    const params = new URLSearchParams({
      country,
      date,
      seed: String(seed),
      n_permutations: String(nPermutations),
    });
    return this.request(`/explain?${params}`);
  }
}
