/**
 * Render optimization trace CSVs into one overlay SVG.
 *
 *   node dist/cli.js run1.csv run2.csv --ref -44.3268 --out figure.svg
 *
 * Options: --ref <value> draws a dashed black reference line, --logy uses a
 * log vertical axis, --ycol <name> selects the plotted column (default
 * objective), --title <text>.  Exit codes: 0 written, 1 usage error, 2
 * unreadable or malformed input.
 */

import { writeFileSync } from "node:fs";
import process from "node:process";

import { parseTrace, TraceFormatError } from "./trace.js";
import { renderSvg } from "./render.js";

interface Args {
  inputs: string[];
  out: string;
  ref?: number;
  logy: boolean;
  ycol?: string;
  title?: string;
}

export function parseArgs(argv: string[]): Args {
  const inputs: string[] = [];
  let out = "";
  let ref: number | undefined;
  let logy = false;
  let ycol: string | undefined;
  let title: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    const need = (name: string): string => {
      const v = argv[++i];
      if (v === undefined) throw new UsageError(`${name} expects a value`);
      return v;
    };
    if (a === "--out") out = need("--out");
    else if (a === "--ref") {
      const v = Number(need("--ref"));
      if (Number.isNaN(v)) throw new UsageError("--ref expects a number");
      ref = v;
    } else if (a === "--logy") logy = true;
    else if (a === "--ycol") ycol = need("--ycol");
    else if (a === "--title") title = need("--title");
    else if (a.startsWith("--")) throw new UsageError(`unknown option ${a}`);
    else inputs.push(a);
  }
  if (inputs.length === 0) throw new UsageError("at least one trace CSV required");
  if (out === "") throw new UsageError("--out <file.svg> is required");
  return { inputs, out, ref, logy, ycol, title };
}

export class UsageError extends Error {}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (e) {
    if (e instanceof UsageError) {
      console.error(`usage error: ${e.message}`);
      console.error(
        "usage: cli.js <trace.csv> [more.csv ...] --out figure.svg " +
        "[--ref value] [--logy] [--ycol objective] [--title text]");
      return 1;
    }
    throw e;
  }
  try {
    const traces = args.inputs.map((p) => parseTrace(p));
    const svg = renderSvg({
      traces,
      reference: args.ref,
      logY: args.logy,
      yColumn: args.ycol,
      title: args.title,
    });
    writeFileSync(args.out, svg, "utf-8");
    console.log(`wrote ${args.out} (${traces.length} curves`
      + (args.ref !== undefined ? ", reference line" : "") + ")");
    return 0;
  } catch (e) {
    if (e instanceof TraceFormatError || (e instanceof Error && "code" in e)) {
      console.error(`input error: ${(e as Error).message}`);
      return 2;
    }
    if (e instanceof Error) {
      console.error(`render error: ${e.message}`);
      return 2;
    }
    throw e;
  }
}

const invokedDirectly = process.argv[1] !== undefined
  && import.meta.url.endsWith(process.argv[1].replace(/^.*\//, ""));
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
