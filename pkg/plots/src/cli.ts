#!/usr/bin/env node
/**
 * CLI: render benchmark CSV logs as an SVG figure.
 *
 *   astr-plot --in runs/astr_seed1.csv:ASTR --in runs/tr_seed1.csv:TR \
 *             --x egrads --y gap --logy --out fig.svg
 */
import { writeFileSync } from "fs";
import { basename } from "path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { readRunCsv, SchemaError } from "./csv.js";
import { FigureError, FigureSpec, render, SeriesInput, XAxis, YAxis } from "./figure.js";

export function parseInputArg(arg: string): { path: string; label: string } {
  const sep = arg.lastIndexOf(":");
  // a trailing ":label" is optional; bare paths label themselves
  if (sep > 1 && sep < arg.length - 1 && !arg.slice(sep + 1).includes("/")) {
    return { path: arg.slice(0, sep), label: arg.slice(sep + 1) };
  }
  return { path: arg, label: basename(arg).replace(/\.csv$/, "") };
}

export function buildSpec(argv: {
  in: string[];
  x: string;
  y: string;
  logy: boolean;
}): FigureSpec {
  const inputs: SeriesInput[] = argv.in.map((arg) => {
    const { path, label } = parseInputArg(arg);
    return { table: readRunCsv(path), label };
  });
  return {
    inputs,
    x: argv.x as XAxis,
    y: argv.y as YAxis,
    logy: argv.logy,
  };
}

export async function main(args: string[]): Promise<number> {
  const argv = await yargs(args)
    .option("in", {
      type: "string",
      array: true,
      demandOption: true,
      describe: "input CSV as path[:label]; repeat for multiple series",
    })
    .option("x", {
      choices: ["seconds", "egrads"] as const,
      default: "egrads" as const,
    })
    .option("y", {
      choices: ["gap", "test_acc", "s", "R"] as const,
      default: "gap" as const,
    })
    .option("logy", { type: "boolean", default: false })
    .option("out", { type: "string", demandOption: true })
    .strict()
    .fail((msg) => {
      throw new Error(msg);
    })
    .parse();

  const svg = render(buildSpec(argv as { in: string[]; x: string; y: string; logy: boolean }));
  writeFileSync(argv.out as string, svg + "\n");
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(basename(process.argv[1]));

if (invokedDirectly) {
  main(hideBin(process.argv))
    .then((code) => process.exit(code))
    .catch((err: unknown) => {
      const message =
        err instanceof SchemaError || err instanceof FigureError || err instanceof Error
          ? err.message
          : String(err);
      console.error(`error: ${message}`);
      process.exit(1);
    });
}
