/** Config form model: panels, field specs and config assembly.
 *
 * The panel grouping follows the server's configuration sections (Core /
 * Cache / Memory / NoC / Program). Field state lives in a flat record so
 * assembly into a SystemConfig is a pure, testable function.
 */

import type { SystemConfig } from "./types.js";

export type FieldKind = "int" | "select" | "bool";

export interface FieldSpec {
  key: string;
  label: string;
  kind: FieldKind;
  options?: string[];
  min?: number;
  max?: number;
  default: string | number | boolean;
}

export interface PanelSpec {
  name: string;
  fields: FieldSpec[];
}

export const PANELS: PanelSpec[] = [
  {
    name: "Core",
    fields: [
      { key: "core.count", label: "Cores", kind: "int", min: 1, max: 16, default: 1 },
      {
        key: "core.variant", label: "Variant", kind: "select",
        options: ["single-cycle", "five-stage-stall", "five-stage-bypass",
                  "seven-stage", "ooo"],
        default: "seven-stage",
      },
      { key: "core.queue_length", label: "OOO queue length", kind: "int", min: 1, max: 64, default: 8 },
      { key: "core.alus", label: "OOO ALU count", kind: "int", min: 1, max: 8, default: 1 },
    ],
  },
  {
    name: "Cache",
    fields: [
      { key: "cache.enabled", label: "Cache subsystem", kind: "bool", default: true },
      { key: "cache.l1_index_bits", label: "L1 index bits", kind: "int", min: 0, max: 12, default: 6 },
      { key: "cache.l1_offset_bits", label: "L1 offset bits", kind: "int", min: 0, max: 5, default: 2 },
      { key: "cache.l1_ways", label: "L1 ways", kind: "int", min: 1, max: 16, default: 4 },
      { key: "cache.l2_index_bits", label: "L2 index bits", kind: "int", min: 0, max: 14, default: 7 },
      { key: "cache.l2_offset_bits", label: "L2 offset bits", kind: "int", min: 0, max: 6, default: 2 },
      { key: "cache.l2_ways", label: "L2 ways", kind: "int", min: 1, max: 16, default: 4 },
      {
        key: "cache.replacement", label: "Replacement", kind: "select",
        options: ["lru", "random"], default: "lru",
      },
    ],
  },
  {
    name: "Memory",
    fields: [
      {
        key: "mem.kind", label: "Kind", kind: "select",
        options: ["asynchronous", "synchronous", "off-chip"], default: "synchronous",
      },
      { key: "mem.address_bits", label: "Address bits", kind: "int", min: 4, max: 24, default: 17 },
      { key: "mem.latency", label: "Off-chip latency", kind: "int", min: 2, max: 64, default: 4 },
      {
        key: "mem.layout", label: "Layout", kind: "select",
        options: ["separate", "unified"], default: "separate",
      },
    ],
  },
  {
    name: "NoC",
    fields: [
      { key: "noc.enabled", label: "Distributed memory over NoC", kind: "bool", default: false },
      { key: "noc.width", label: "Mesh width", kind: "int", min: 1, max: 8, default: 2 },
      { key: "noc.height", label: "Mesh height", kind: "int", min: 1, max: 8, default: 2 },
      { key: "noc.vcs", label: "Virtual channels", kind: "int", min: 1, max: 8, default: 2 },
      { key: "noc.depth", label: "VC depth", kind: "int", min: 1, max: 16, default: 4 },
      {
        key: "noc.router", label: "Router", kind: "select",
        options: ["single-cycle", "pipelined"], default: "single-cycle",
      },
      { key: "noc.llc_node", label: "LLC node", kind: "int", min: 0, max: 63, default: 0 },
    ],
  },
  {
    name: "Program",
    fields: [
      {
        key: "prog.benchmark", label: "Benchmark", kind: "select",
        options: ["factorial", "prime", "prime-parallel", "mandelbrot"],
        default: "prime",
      },
      { key: "prog.seed", label: "Seed", kind: "int", min: 0, max: 1 << 30, default: 0 },
    ],
  },
];

export type FormState = Record<string, string | number | boolean>;

export function defaultFormState(): FormState {
  const state: FormState = {};
  for (const panel of PANELS) {
    for (const field of panel.fields) {
      state[field.key] = field.default;
    }
  }
  return state;
}

function num(state: FormState, key: string): number {
  const v = state[key];
  const n = typeof v === "number" ? v : parseInt(String(v), 10);
  return Number.isFinite(n) ? n : 0;
}

/** Assemble a SystemConfig from form state; pure. */
export function configFromForm(state: FormState): SystemConfig {
  const nCores = Math.max(1, num(state, "core.count"));
  const variant = String(state["core.variant"]);
  const core: SystemConfig["cores"][number] = { variant };
  if (variant === "ooo") {
    core.queue_length = num(state, "core.queue_length");
    core.alu_latencies = Array(Math.max(1, num(state, "core.alus"))).fill(1);
  }
  const cachesOn = Boolean(state["cache.enabled"]) || nCores > 1;
  const repl = String(state["cache.replacement"]) as "lru" | "random";
  const memKind = String(state["mem.kind"]);
  const cfg: SystemConfig = {
    name: "explorer",
    seed: num(state, "prog.seed"),
    cores: Array.from({ length: nCores }, () => ({ ...core })),
    memory: {
      kind: memKind,
      address_bits: num(state, "mem.address_bits"),
      layout: String(state["mem.layout"]),
    },
    caches: cachesOn
      ? {
          l1i: {
            index_bits: num(state, "cache.l1_index_bits"),
            offset_bits: num(state, "cache.l1_offset_bits"),
            ways: num(state, "cache.l1_ways"),
            replacement: repl,
          },
          l1d: {
            index_bits: num(state, "cache.l1_index_bits"),
            offset_bits: num(state, "cache.l1_offset_bits"),
            ways: num(state, "cache.l1_ways"),
            replacement: repl,
          },
          l2: {
            index_bits: num(state, "cache.l2_index_bits"),
            offset_bits: num(state, "cache.l2_offset_bits"),
            ways: num(state, "cache.l2_ways"),
            replacement: repl,
          },
        }
      : null,
    interconnect: { kind: cachesOn ? "shared-bus" : "none" },
  };
  if (memKind === "off-chip") {
    cfg.memory.latency = num(state, "mem.latency");
  }
  if (Boolean(state["noc.enabled"]) && cachesOn) {
    cfg.interconnect = {
      kind: "noc",
      width: num(state, "noc.width"),
      height: num(state, "noc.height"),
      virtual_channels: num(state, "noc.vcs"),
      vc_depth: num(state, "noc.depth"),
      router: String(state["noc.router"]) as "single-cycle" | "pipelined",
      routing: "dor",
      llc_node: num(state, "noc.llc_node"),
    };
  }
  return cfg;
}

export function selectedBenchmark(state: FormState): string {
  const name = String(state["prog.benchmark"]);
  return `bench:${name}`;
}

/** The 4-core sample shipped with the explorer. */
export function fourCoreSampleState(): FormState {
  const state = defaultFormState();
  state["core.count"] = 4;
  state["core.variant"] = "seven-stage";
  state["cache.enabled"] = true;
  state["prog.benchmark"] = "prime-parallel";
  return state;
}
