import { describe, expect, it } from "vitest";

import { deriveDiagram, renderDiagramSvg } from "../src/diagram.js";
import { configFromForm, fourCoreSampleState } from "../src/forms.js";

describe("diagram derivation", () => {
  it("renders core and memory only when caches are off", () => {
    const model = deriveDiagram({
      cores: [{ variant: "single-cycle" }],
      memory: { kind: "asynchronous" },
      caches: null,
      interconnect: { kind: "none" },
    });
    expect(model.cores).toHaveLength(1);
    expect(model.l1s).toHaveLength(0);
    expect(model.hasL2).toBe(false);
    expect(model.hasBus).toBe(false);
    expect(model.memoryLabel).toContain("asynchronous");
  });

  it("the 4-core sample shows 4 cores, 8 L1s, one L2 and the bus", () => {
    const cfg = configFromForm(fourCoreSampleState());
    const model = deriveDiagram(cfg);
    expect(model.cores).toHaveLength(4);
    expect(model.l1s).toHaveLength(8);
    expect(model.hasL2).toBe(true);
    expect(model.hasBus).toBe(true);

    const svg = renderDiagramSvg(model);
    expect(svg.match(/class="core"/g)).toHaveLength(4);
    expect(svg.match(/class="l1"/g)).toHaveLength(8);
    expect(svg.match(/class="l2"/g)).toHaveLength(1);
    expect(svg).toContain("coherent bus");
  });

  it("a 2x2 mesh adds 4 node tiles with the LLC highlighted", () => {
    const model = deriveDiagram({
      cores: [{ variant: "seven-stage" }],
      memory: { kind: "synchronous" },
      caches: {
        l1i: { index_bits: 6, offset_bits: 2, ways: 4 },
        l1d: { index_bits: 6, offset_bits: 2, ways: 4 },
        l2: { index_bits: 7, offset_bits: 2, ways: 4 },
      },
      interconnect: { kind: "noc", width: 2, height: 2, llc_node: 3 },
    });
    expect(model.noc).toEqual({ width: 2, height: 2, llcNode: 3 });
    const svg = renderDiagramSvg(model);
    expect(svg.match(/class="node( llc)?"/g)).toHaveLength(4);
    expect(svg.match(/class="node llc"/g)).toHaveLength(1);
    expect(svg).toContain("distributed");
  });

  it("renders the validation error list for broken configs", () => {
    const model = deriveDiagram({} as never);
    expect(model.errors.length).toBeGreaterThan(0);
    const svg = renderDiagramSvg(model);
    expect(svg).toContain("no cores configured");
  });
});
