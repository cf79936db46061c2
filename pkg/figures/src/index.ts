import { readFileSync, writeFileSync } from "node:fs";

import { chartSvg, FigureSpec } from "./chart.js";
import { Metric, parseBench } from "./schema.js";

export {
  BenchRow,
  InputError,
  Metric,
  METRICS,
  parseBench,
  SchemaError,
} from "./schema.js";
export { chartSvg, FigureSpec } from "./chart.js";

export interface RenderOptions extends FigureSpec {
  input: string;
  out: string;
}

/** Read a benchmark CSV, draw the chart, write the SVG file. */
export function render(opts: RenderOptions): void {
  const rows = parseBench(readFileSync(opts.input, "utf8"));
  writeFileSync(opts.out, chartSvg(rows, opts));
}
