import { createHash } from "node:crypto";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { performance } from "node:perf_hooks";

import { describe, expect, it } from "vitest";

import { chartSvg } from "../src/chart.js";
import { render } from "../src/index.js";
import { BenchRow, Metric, parseBench } from "../src/schema.js";

const FIXTURE = fileURLToPath(
  new URL("./fixtures/bench_100kbps.csv", import.meta.url),
);

function fixtureRows(): BenchRow[] {
  return parseBench(readFileSync(FIXTURE, "utf8"));
}

function sha256(text: string): string {
  return createHash("sha256").update(text).digest("hex");
}

describe("chartSvg", () => {
  it("draws one bar per row, in row order", () => {
    const rows = fixtureRows();
    const svg = chartSvg(rows, { metric: "latency_s" });
    const bars = [...svg.matchAll(/<rect class="bar" data-scenario="([^"]+)"/g)];
    expect(bars.map((m) => m[1])).toEqual(rows.map((r) => r.scenarioId));
  });

  it("legend lists exactly the kinds present", () => {
    const rows = fixtureRows();
    const svg = chartSvg(rows, { metric: "energy_j" });
    const swatches = [...svg.matchAll(/<rect class="legend"/g)];
    expect(swatches).toHaveLength(3);
    for (const kind of ["LC", "SC", "Ours"]) {
      expect(svg).toContain(`>${kind}</text>`);
    }
    const onlyLc = chartSvg(rows.slice(0, 3), { metric: "energy_j" });
    expect([...onlyLc.matchAll(/<rect class="legend"/g)]).toHaveLength(1);
    expect(onlyLc).toContain(">LC</text>");
    expect(onlyLc).not.toContain(">Ours</text>");
  });

  it("titles default to the metric label and can be overridden", () => {
    const rows = fixtureRows().slice(0, 2);
    expect(chartSvg(rows, { metric: "local_gmac" })).toContain(
      "mobile compute (GMAC)",
    );
    expect(
      chartSvg(rows, { metric: "local_gmac", title: "A & B" }),
    ).toContain("A &amp; B");
  });

  it("survives an all-zero metric column", () => {
    const rows = fixtureRows().map((r) => ({
      ...r,
      metrics: { ...r.metrics, local_gmac: 0 },
    }));
    const svg = chartSvg(rows, { metric: "local_gmac" });
    expect(svg).toContain('height="0.00"');
    expect(svg).not.toContain("NaN");
  });

  it("rejects unknown metrics", () => {
    expect(() =>
      chartSvg(fixtureRows(), { metric: "accuracy" as Metric }),
    ).toThrowError(/metric must be one of/);
  });
});

describe("render", () => {
  it("is deterministic over the full benchmark table", () => {
    const t0 = performance.now();
    const dir = mkdtempSync(join(tmpdir(), "figures-"));
    const a = join(dir, "a.svg");
    const b = join(dir, "b.svg");
    render({ input: FIXTURE, out: a, metric: "latency_s" });
    render({ input: FIXTURE, out: b, metric: "latency_s" });
    const first = readFileSync(a, "utf8");
    expect(first).toContain("<svg");
    expect([...first.matchAll(/<rect class="bar"/g)]).toHaveLength(40);
    expect(sha256(first)).toBe(sha256(readFileSync(b, "utf8")));
    expect(performance.now() - t0).toBeLessThan(10_000);
  });
});
