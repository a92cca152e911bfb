import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, reportMetrics } from "../src/api.js";
import type { StatsReport } from "../src/types.js";

function fakeFetch(routes: Record<string, unknown>, status = 200) {
  const calls: Array<{ url: string; body?: unknown }> = [];
  const fn = async (url: string, init?: RequestInit) => {
    calls.push({ url, body: init?.body ? JSON.parse(String(init.body)) : undefined });
    const hit = Object.entries(routes).find(([k]) => url.startsWith(k));
    const payload = hit ? hit[1] : { detail: "not found" };
    return new Response(JSON.stringify(payload), {
      status: hit ? status : 404,
      headers: { "content-type": "application/json" },
    });
  };
  return { fn, calls };
}

describe("api client", () => {
  it("submits runs and returns the id", async () => {
    const { fn, calls } = fakeFetch({ "/api/runs": { id: "abc123" } });
    const api = new ApiClient("", fn);
    const id = await api.submitRun(
      { cores: [{ variant: "seven-stage" }], memory: { kind: "synchronous" },
        caches: null, interconnect: { kind: "none" } },
      "bench:prime",
    );
    expect(id).toBe("abc123");
    expect(calls[0].url).toBe("/api/runs");
    expect((calls[0].body as { program: string }).program).toBe("bench:prime");
  });

  it("raises ApiError with the server detail", async () => {
    const fn = async () =>
      new Response(JSON.stringify({ detail: "bad config" }), { status: 422 });
    const api = new ApiClient("", fn);
    await expect(api.runInfo("zzz")).rejects.toThrowError(ApiError);
    await expect(api.runInfo("zzz")).rejects.toThrow("bad config");
  });

  it("waitRun polls until a terminal state", async () => {
    let polls = 0;
    const fn = async (url: string) => {
      polls += 1;
      const status = polls < 3 ? "running" : "completed";
      return new Response(
        JSON.stringify({ id: "r1", status, error: null, report: null }),
        { status: 200 },
      );
    };
    const api = new ApiClient("", fn);
    const info = await api.waitRun("r1", 1);
    expect(info.status).toBe("completed");
    expect(polls).toBe(3);
  });
});

describe("report metrics", () => {
  it("shows server numbers verbatim", () => {
    const report = {
      stats_version: 1,
      status: "completed",
      cycles: 12345,
      seed: 0,
      config: {} as never,
      cores: [],
      caches: [],
      derived: {
        total_retired: 6789,
        global_ipc: 0.55,
        final_a0: [25],
        miss_rates: { "core0.l1d": 0.015625 },
      },
    } as unknown as StatsReport;
    const rows = reportMetrics(report);
    expect(rows).toContainEqual(["cycles", "12345"]);
    expect(rows).toContainEqual(["total retired", "6789"]);
    expect(rows).toContainEqual(["final a0", "25"]);
    expect(rows).toContainEqual(["miss core0.l1d", "0.0156"]);
  });
});
