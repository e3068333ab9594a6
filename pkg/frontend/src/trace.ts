/**
 * Reader for the optimizer's CSV trace schema.
 *
 * A trace file carries `# key = value` comment lines (the run's config
 * echo and terminal info), then a column-name header, then numeric rows.
 * The reader is strict: a missing header, an unknown shape, or an empty
 * row section is an error naming the file and the offending column.
 */

import { readFileSync } from "node:fs";

export interface Trace {
  path: string;
  label: string;
  meta: Record<string, string>;
  columns: Record<string, number[]>;
  columnNames: string[];
  status: string;
}

export class TraceFormatError extends Error {
  constructor(public file: string, message: string) {
    super(`${file}: ${message}`);
    this.name = "TraceFormatError";
  }
}

const REQUIRED_COLUMNS = ["iteration", "objective"];

export function parseTrace(path: string, text?: string): Trace {
  const raw = text ?? readFileSync(path, "utf-8");
  const meta: Record<string, string> = {};
  let names: string[] | null = null;
  const rows: number[][] = [];

  for (const line of raw.split(/\r?\n/)) {
    if (line === "") continue;
    if (line.startsWith("#")) {
      const body = line.slice(1).trim();
      const eq = body.indexOf(" = ");
      if (eq > 0) meta[body.slice(0, eq)] = body.slice(eq + 3);
      continue;
    }
    if (names === null) {
      names = line.split(",").map((s: string) => s.trim());
      for (const required of REQUIRED_COLUMNS) {
        if (!names.includes(required)) {
          throw new TraceFormatError(path, `missing required column '${required}'`);
        }
      }
      continue;
    }
    const header: string[] = names;
    const parts = line.split(",");
    if (parts.length !== header.length) {
      throw new TraceFormatError(
        path,
        `row has ${parts.length} fields, header has ${header.length}`,
      );
    }
    const row = parts.map(Number);
    const bad = row.findIndex((v: number) => Number.isNaN(v));
    if (bad >= 0) {
      throw new TraceFormatError(path, `non-numeric value in column '${header[bad]}'`);
    }
    rows.push(row);
  }

  if (names === null) throw new TraceFormatError(path, "no column header found");
  if (rows.length === 0) throw new TraceFormatError(path, "no data rows after header");

  const columns: Record<string, number[]> = {};
  names.forEach((name, k) => {
    columns[name] = rows.map((r) => r[k]);
  });
  const label = meta["label"] && meta["label"].length > 0
    ? meta["label"]
    : path.replace(/^.*\//, "").replace(/\.[^.]+$/, "");
  return { path, label, meta, columns, columnNames: names, status: meta["status"] ?? "" };
}
