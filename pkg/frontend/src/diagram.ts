/** Block diagram derivation and SVG rendering.
 *
 * deriveDiagram is a pure function from a (possibly partial) config to a
 * block model; renderDiagramSvg turns the model into an SVG string. Keeping
 * these pure lets tests pin the exact structure without a DOM.
 */

import type { SystemConfig } from "./types.js";

export interface DiagramModel {
  cores: Array<{ name: string; variant: string }>;
  l1s: Array<{ name: string; core: number; kind: "I" | "D" }>;
  hasL2: boolean;
  hasBus: boolean;
  memoryLabel: string;
  noc: { width: number; height: number; llcNode: number } | null;
  errors: string[];
}

export function deriveDiagram(cfg: Partial<SystemConfig> | null): DiagramModel {
  const model: DiagramModel = {
    cores: [],
    l1s: [],
    hasL2: false,
    hasBus: false,
    memoryLabel: "memory",
    noc: null,
    errors: [],
  };
  if (!cfg || typeof cfg !== "object") {
    model.errors.push("configuration is not an object");
    return model;
  }
  const cores = Array.isArray(cfg.cores) ? cfg.cores : [];
  if (cores.length === 0) {
    model.errors.push("no cores configured");
  }
  cores.forEach((c, i) => {
    model.cores.push({ name: `core${i}`, variant: c?.variant ?? "?" });
  });
  const caches = cfg.caches ?? null;
  if (caches) {
    cores.forEach((_c, i) => {
      model.l1s.push({ name: `core${i} L1I`, core: i, kind: "I" });
      model.l1s.push({ name: `core${i} L1D`, core: i, kind: "D" });
    });
    model.hasL2 = true;
    model.hasBus = true;
  }
  const mem = cfg.memory ?? { kind: "asynchronous" };
  model.memoryLabel = `${mem.kind ?? "asynchronous"} memory`;
  const inter = cfg.interconnect;
  if (inter && inter.kind === "noc") {
    const width = inter.width ?? 2;
    const height = inter.height ?? 2;
    model.noc = { width, height, llcNode: inter.llc_node ?? 0 };
    model.memoryLabel = `distributed ${mem.kind ?? ""} memory`.trim();
  }
  return model;
}

const BLOCK_W = 92;
const BLOCK_H = 34;
const GAP = 14;

function rect(x: number, y: number, w: number, h: number, cls: string, label: string): string {
  const tx = x + w / 2;
  const ty = y + h / 2 + 4;
  return (
    `<rect class="${cls}" x="${x}" y="${y}" width="${w}" height="${h}" rx="6"/>` +
    `<text x="${tx}" y="${ty}" text-anchor="middle">${label}</text>`
  );
}

function line(x1: number, y1: number, x2: number, y2: number): string {
  return `<line x1="${x1}" y1="${y1}" x2="${x2}" y2="${y2}"/>`;
}

export function renderDiagramSvg(model: DiagramModel): string {
  if (model.errors.length > 0) {
    const msgs = model.errors
      .map((e, i) => `<text x="12" y="${26 + i * 18}" class="err">${e}</text>`)
      .join("");
    return `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 420 120">${msgs}</svg>`;
  }
  const n = Math.max(model.cores.length, 1);
  const colW = model.l1s.length > 0 ? 2 * (BLOCK_W / 2 + 4) + GAP : BLOCK_W + GAP;
  const width = Math.max(n * colW + GAP, 360);
  const parts: string[] = [];
  let y = GAP;
  model.cores.forEach((core, i) => {
    const x = GAP + i * colW;
    parts.push(rect(x, y, colW - GAP, BLOCK_H, "core", `${core.name} (${core.variant})`));
  });
  y += BLOCK_H + GAP;
  if (model.l1s.length > 0) {
    model.cores.forEach((_core, i) => {
      const x = GAP + i * colW;
      const half = (colW - GAP - 6) / 2;
      parts.push(rect(x, y, half, BLOCK_H, "l1", "L1I"));
      parts.push(rect(x + half + 6, y, half, BLOCK_H, "l1", "L1D"));
      parts.push(line(x + (colW - GAP) / 2, y - GAP, x + (colW - GAP) / 2, y));
    });
    y += BLOCK_H + GAP;
    parts.push(rect(GAP, y, width - 2 * GAP, 12, "bus", ""));
    parts.push(`<text x="${width / 2}" y="${y + 26}" text-anchor="middle" class="small">coherent bus</text>`);
    y += 12 + GAP + 12;
    parts.push(rect(width / 2 - BLOCK_W, y, 2 * BLOCK_W, BLOCK_H, "l2", "shared L2"));
    y += BLOCK_H + GAP;
  }
  if (model.noc) {
    const { width: mw, height: mh, llcNode } = model.noc;
    const tile = 46;
    const nocW = mw * (tile + 8);
    const x0 = width / 2 - nocW / 2;
    for (let ny = 0; ny < mh; ny++) {
      for (let nx = 0; nx < mw; nx++) {
        const node = ny * mw + nx;
        const cls = node === llcNode ? "node llc" : "node";
        parts.push(
          rect(x0 + nx * (tile + 8), y + (mh - 1 - ny) * (tile + 8), tile, tile, cls, `n${node}`),
        );
      }
    }
    y += mh * (tile + 8) + GAP;
  }
  parts.push(rect(width / 2 - BLOCK_W, y, 2 * BLOCK_W, BLOCK_H, "mem", model.memoryLabel));
  const height = y + BLOCK_H + GAP;
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}">` +
    parts.join("") +
    `</svg>`
  );
}
