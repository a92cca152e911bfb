/** Thin client over the explorer HTTP API. */

import type { RunInfo, StatsReport, SystemConfig, ValidationResult } from "./types.js";

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.base + path, init);
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const body = await res.json();
        detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body);
      } catch {
        /* keep statusText */
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  schema(): Promise<{ config_schema: unknown; stats_schema: unknown }> {
    return this.request("/api/schema");
  }

  validate(config: unknown): Promise<ValidationResult> {
    return this.request("/api/validate", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config),
    });
  }

  benchmarks(): Promise<Array<{ name: string; description: string }>> {
    return this.request("/api/benchmarks");
  }

  async submitRun(config: SystemConfig, program: string, vmh?: string): Promise<string> {
    const body: Record<string, unknown> = { config, program };
    if (vmh !== undefined) {
      body.vmh = vmh;
      delete body.program;
    }
    const out = await this.request<{ id: string }>("/api/runs", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return out.id;
  }

  runInfo(id: string): Promise<RunInfo> {
    return this.request(`/api/runs/${id}`);
  }

  listRuns(): Promise<Array<{ id: string; status: string; cycles: number | null }>> {
    return this.request("/api/runs");
  }

  trace(id: string, hart = 0, start = 0, count = 50): Promise<{
    hart: number;
    start: number;
    total: number;
    records: Array<{ pc: number; instr: number; rd: number; val: number }>;
  }> {
    return this.request(`/api/runs/${id}/trace?hart=${hart}&start=${start}&count=${count}`);
  }

  /** Poll until the run leaves the queued/running states. */
  async waitRun(id: string, pollMs = 250, timeoutMs = 600_000): Promise<RunInfo> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const info = await this.runInfo(id);
      if (info.status !== "queued" && info.status !== "running") return info;
      if (Date.now() > deadline) throw new ApiError(408, `run ${id} timed out`);
      await new Promise((r) => setTimeout(r, pollMs));
    }
  }
}

export function reportMetrics(report: StatsReport): Array<[string, string]> {
  /** Headline metrics straight off the server report (never recomputed). */
  const rows: Array<[string, string]> = [
    ["status", report.status],
    ["cycles", String(report.cycles)],
    ["total retired", String(report.derived.total_retired)],
    ["global IPC", String(report.derived.global_ipc)],
    ["final a0", report.derived.final_a0.join(", ")],
  ];
  for (const [name, rate] of Object.entries(report.derived.miss_rates)) {
    rows.push([`miss ${name}`, rate.toFixed(4)]);
  }
  return rows;
}
