/** SVG bar chart for run comparisons; pure string generation. */

export interface BarEntry {
  label: string;
  value: number;
  highlight?: boolean;
}

export function barChartSvg(entries: BarEntry[], title = ""): string {
  const width = 380;
  const barH = 22;
  const gap = 8;
  const left = 118;
  const height = entries.length * (barH + gap) + gap + (title ? 22 : 0);
  const max = Math.max(...entries.map((e) => e.value), 1);
  const parts: string[] = [];
  let y = title ? 22 : gap;
  if (title) {
    parts.push(`<text x="8" y="14" class="chart-title">${title}</text>`);
  }
  for (const e of entries) {
    const w = Math.max(2, ((width - left - 60) * e.value) / max);
    const cls = e.highlight ? "bar highlight" : "bar";
    parts.push(`<text x="${left - 6}" y="${y + barH - 7}" text-anchor="end">${e.label}</text>`);
    parts.push(`<rect class="${cls}" x="${left}" y="${y}" width="${w}" height="${barH}" rx="3"/>`);
    parts.push(`<text x="${left + w + 6}" y="${y + barH - 7}" class="value">${e.value}</text>`);
    y += barH + gap;
  }
  return `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}">${parts.join("")}</svg>`;
}

/** Cycle-count ratios against a baseline value (speedup = base/this). */
export function speedups(baseCycles: number, entries: Array<{ label: string; cycles: number }>) {
  return entries.map((e) => ({
    label: e.label,
    speedup: e.cycles > 0 ? baseCycles / e.cycles : 0,
  }));
}
