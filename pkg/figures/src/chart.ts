/**
 * Grouped bar chart over benchmark rows, rendered as standalone SVG.
 *
 * Bars follow CSV row order exactly (the producer writes the matrix in
 * its canonical order, so the chart reads left to right as the
 * published table does). Bars are colored by scenario kind and the
 * legend lists exactly the kinds present. Output is a pure function of
 * the input rows, so identical CSVs give byte-identical files.
 */

import { BenchRow, Metric, METRICS } from "./schema.js";

export interface FigureSpec {
  metric: Metric;
  title?: string;
  yLabel?: string;
}

const WIDTH = 1180;
const HEIGHT = 420;
const MARGIN = { top: 48, right: 24, bottom: 88, left: 72 };

const KIND_COLORS: Record<string, string> = {
  LC: "#8892a8",
  SC: "#e0a458",
  Ours: "#4f9d69",
};
const FALLBACK_COLOR = "#777777";

const METRIC_LABELS: Record<Metric, string> = {
  latency_s: "end-to-end latency (s)",
  energy_j: "mobile energy (J)",
  local_gmac: "mobile compute (GMAC)",
};

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const s = v >= 100 ? v.toFixed(0) : v >= 1 ? v.toFixed(1) : v.toFixed(3);
  return s.replace(/\.0+$/, "");
}

export function chartSvg(rows: BenchRow[], spec: FigureSpec): string {
  if (!METRICS.includes(spec.metric)) {
    throw new Error(`metric must be one of ${METRICS.join(", ")}`);
  }
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const values = rows.map((r) => r.metrics[spec.metric]);
  const vmax = Math.max(...values, 0);
  const scale = vmax > 0 ? plotH / vmax : 0;

  const n = rows.length;
  const slot = plotW / n;
  const barW = slot * 0.78;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
      `height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
      `font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  const title = spec.title ?? METRIC_LABELS[spec.metric];
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16">` +
      `${esc(title)}</text>`,
  );

  // y axis: baseline, 4 ticks, rotated label
  const x0 = MARGIN.left;
  const y0 = MARGIN.top + plotH;
  for (let t = 0; t <= 4; t++) {
    const v = (vmax * t) / 4;
    const y = y0 - v * scale;
    parts.push(
      `<line x1="${x0}" y1="${y.toFixed(2)}" x2="${WIDTH - MARGIN.right}" ` +
        `y2="${y.toFixed(2)}" stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${x0 - 8}" y="${(y + 4).toFixed(2)}" text-anchor="end" ` +
        `font-size="11">${fmtTick(v)}</text>`,
    );
  }
  const yLabel = spec.yLabel ?? METRIC_LABELS[spec.metric];
  parts.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" font-size="12" ` +
      `text-anchor="middle" transform="rotate(-90 18 ${
        MARGIN.top + plotH / 2
      })">${esc(yLabel)}</text>`,
  );

  // bars in row order, labeled under the axis
  rows.forEach((row, i) => {
    const h = row.metrics[spec.metric] * scale;
    const x = x0 + i * slot + (slot - barW) / 2;
    const y = y0 - h;
    const color = KIND_COLORS[row.kind] ?? FALLBACK_COLOR;
    parts.push(
      `<rect class="bar" data-scenario="${esc(row.scenarioId)}" ` +
        `x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${barW.toFixed(2)}" ` +
        `height="${h.toFixed(2)}" fill="${color}"/>`,
    );
    const lx = x0 + i * slot + slot / 2;
    parts.push(
      `<text x="${lx.toFixed(2)}" y="${y0 + 10}" font-size="7" ` +
        `text-anchor="end" transform="rotate(-60 ${lx.toFixed(2)} ${
          y0 + 10
        })">${esc(row.scenarioId)}</text>`,
    );
  });
  parts.push(
    `<line x1="${x0}" y1="${y0}" x2="${WIDTH - MARGIN.right}" y2="${y0}" ` +
      `stroke="#333333" stroke-width="1"/>`,
  );

  // legend: exactly the kinds present, in first-appearance order
  const kinds: string[] = [];
  for (const row of rows) {
    if (!kinds.includes(row.kind)) kinds.push(row.kind);
  }
  kinds.forEach((kind, i) => {
    const x = WIDTH - MARGIN.right - 70 * (kinds.length - i);
    parts.push(
      `<rect class="legend" x="${x}" y="36" width="12" height="12" ` +
        `fill="${KIND_COLORS[kind] ?? FALLBACK_COLOR}"/>`,
    );
    parts.push(
      `<text x="${x + 16}" y="46" font-size="12">${esc(kind)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
