#!/usr/bin/env node
/** Command-line entry: benchmark CSV in, bar-chart SVG out. */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { render } from "./index.js";
import { InputError, Metric, METRICS, SchemaError } from "./schema.js";

const argv = yargs(hideBin(process.argv))
  .usage("$0 --input bench.csv --out chart.svg [--metric M] [--title T]")
  .option("input", {
    type: "string",
    demandOption: true,
    describe: "benchmark CSV produced by the bench command",
  })
  .option("metric", {
    type: "string",
    choices: METRICS,
    default: "latency_s" as Metric,
    describe: "column to plot",
  })
  .option("out", {
    type: "string",
    demandOption: true,
    describe: "output SVG path",
  })
  .option("title", { type: "string", describe: "chart title" })
  .strict()
  .parseSync();

try {
  render({
    input: argv.input,
    out: argv.out,
    metric: argv.metric as Metric,
    title: argv.title,
  });
} catch (err) {
  if (err instanceof SchemaError || err instanceof InputError) {
    process.stderr.write(`error: ${err.message}\n`);
    process.exit(1);
  }
  throw err;
}
