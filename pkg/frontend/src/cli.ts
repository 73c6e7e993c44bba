#!/usr/bin/env node
/** `plots render --csv <path> --figure <name> --out <path>` */

import { pathToFileURL } from "node:url";
import { FigureKind, render } from "./figures.js";

const USAGE = "usage: plots render --csv <path> --figure <shift-curves|scatter|sweep-panels> --out <path>";

export function main(argv: string[]): number {
  if (argv[0] !== "render") {
    console.error(USAGE);
    return 2;
  }
  const opts = new Map<string, string>();
  for (let i = 1; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      console.error(USAGE);
      return 2;
    }
    opts.set(key.slice(2), value);
  }
  const csv = opts.get("csv");
  const figure = opts.get("figure");
  const out = opts.get("out");
  if (!csv || !figure || !out) {
    console.error(USAGE);
    return 2;
  }
  if (!["shift-curves", "scatter", "sweep-panels"].includes(figure)) {
    console.error(`unknown figure "${figure}"\n${USAGE}`);
    return 2;
  }
  try {
    render({ inputCsv: csv, figure: figure as FigureKind, output: out });
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
  return 0;
}

if (process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
