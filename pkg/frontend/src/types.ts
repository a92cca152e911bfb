/** Shared shapes for the explorer; mirrors the server's published schemas. */

export interface CacheLevelConfig {
  index_bits: number;
  offset_bits: number;
  ways: number;
  replacement?: "lru" | "random";
}

export interface CachesConfig {
  l1i: CacheLevelConfig;
  l1d: CacheLevelConfig;
  l2: CacheLevelConfig;
}

export interface CoreConfig {
  variant: string;
  queue_length?: number;
  alu_latencies?: number[];
}

export interface InterconnectConfig {
  kind: "none" | "shared-bus" | "noc";
  width?: number;
  height?: number;
  virtual_channels?: number;
  vc_depth?: number;
  router?: "single-cycle" | "pipelined";
  router_stages?: number;
  routing?: "dor" | "table";
  llc_node?: number;
}

export interface SystemConfig {
  name?: string;
  seed?: number;
  cores: CoreConfig[];
  memory: { kind: string; address_bits?: number; latency?: number; layout?: string };
  caches: CachesConfig | null;
  interconnect: InterconnectConfig;
  program?: string | null;
  max_cycles?: number;
}

export interface ValidationResult {
  ok: boolean;
  errors: string[];
  warnings: string[];
  resolved: SystemConfig;
}

export interface CoreStats {
  name: string;
  cycles: number;
  retired: number;
  ipc: number;
  [k: string]: unknown;
}

export interface StatsReport {
  stats_version: number;
  status: string;
  cycles: number;
  seed: number;
  config: SystemConfig;
  cores: CoreStats[];
  caches: Array<{ name: string; miss_rate: number; [k: string]: unknown }>;
  derived: {
    total_retired: number;
    global_ipc: number;
    final_a0: number[];
    miss_rates: Record<string, number>;
  };
  [k: string]: unknown;
}

export interface RunInfo {
  id: string;
  status: string;
  error: string | null;
  report: StatsReport | null;
}

/** One submitted run as tracked by the UI. */
export interface RunCard {
  id: string;
  label: string;
  status: string;
  config: SystemConfig;
  report: StatsReport | null;
  error: string | null;
  baseline: boolean;
}
