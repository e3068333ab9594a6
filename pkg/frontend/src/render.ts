/**
 * Overlay plot assembly: one curve per trace (objective vs iteration),
 * traces whose label ends in "nokdl" drawn dashed, an optional dashed
 * black reference line, fixed figure geometry, no timestamps; identical
 * inputs produce identical SVG bytes.
 */

import type { Trace } from "./trace.js";
import { Scale, formatTick, linearScale, log10Scale } from "./scale.js";

export interface PlotSpec {
  traces: Trace[];
  reference?: number;
  logY?: boolean;
  title?: string;
  yColumn?: string;
}

const WIDTH = 860;
const HEIGHT = 520;
const MARGIN = { left: 78, right: 24, top: 36, bottom: 52 };

const PALETTE = ["#c0392b", "#2471a3", "#1e8449", "#9b59b6", "#d68910", "#16a085",
  "#7b241c", "#2c3e50"];

function fmt(v: number): string {
  return Number(v.toFixed(3)).toString();
}

export function renderSvg(spec: PlotSpec): string {
  if (spec.traces.length === 0) throw new Error("at least one trace required");
  const yCol = spec.yColumn ?? "objective";

  let xMin = Infinity, xMax = -Infinity, yMin = Infinity, yMax = -Infinity;
  for (const t of spec.traces) {
    const xs = t.columns["iteration"];
    const ys = t.columns[yCol];
    if (!ys) throw new Error(`${t.path}: missing column '${yCol}'`);
    for (let i = 0; i < xs.length; i++) {
      if (xs[i] < xMin) xMin = xs[i];
      if (xs[i] > xMax) xMax = xs[i];
      if (ys[i] < yMin) yMin = ys[i];
      if (ys[i] > yMax) yMax = ys[i];
    }
  }
  if (spec.reference !== undefined) {
    yMin = Math.min(yMin, spec.reference);
    yMax = Math.max(yMax, spec.reference);
  }
  const pad = (yMax - yMin || 1) * 0.05;
  yMin -= pad;
  yMax += pad;

  const x0 = MARGIN.left, x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom, y1 = MARGIN.top;
  const sx = linearScale(xMin, xMax, x0, x1);
  const sy: Scale = spec.logY
    ? log10Scale(Math.max(yMin, 1e-300), yMax, y0, y1)
    : linearScale(yMin, yMax, y0, y1);

  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`);
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  if (spec.title) {
    parts.push(`<text x="${WIDTH / 2}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">${escapeXml(spec.title)}</text>`);
  }

  // axes
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black" stroke-width="1"/>`);
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black" stroke-width="1"/>`);
  for (const v of sx.ticks()) {
    const px = sx.toPixel(v);
    parts.push(`<line x1="${fmt(px)}" y1="${y0}" x2="${fmt(px)}" y2="${y0 + 5}" stroke="black"/>`);
    parts.push(`<text x="${fmt(px)}" y="${y0 + 20}" text-anchor="middle" font-family="sans-serif" font-size="11">${formatTick(v)}</text>`);
  }
  for (const v of sy.ticks()) {
    const py = sy.toPixel(v);
    parts.push(`<line x1="${x0 - 5}" y1="${fmt(py)}" x2="${x0}" y2="${fmt(py)}" stroke="black"/>`);
    parts.push(`<text x="${x0 - 9}" y="${fmt(py + 4)}" text-anchor="end" font-family="sans-serif" font-size="11">${formatTick(v)}</text>`);
  }
  parts.push(`<text x="${(x0 + x1) / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" font-size="13">iteration</text>`);
  parts.push(`<text x="20" y="${(y0 + y1) / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 20 ${(y0 + y1) / 2})">${escapeXml(yCol)}</text>`);

  // reference level
  if (spec.reference !== undefined) {
    const py = sy.toPixel(spec.reference);
    parts.push(`<line class="reference" x1="${x0}" y1="${fmt(py)}" x2="${x1}" y2="${fmt(py)}" stroke="black" stroke-width="1.2" stroke-dasharray="7,5"/>`);
    parts.push(`<text x="${x1 - 4}" y="${fmt(py - 6)}" text-anchor="end" font-family="sans-serif" font-size="11">${formatTick(spec.reference)}</text>`);
  }

  // curves
  spec.traces.forEach((t, k) => {
    const xs = t.columns["iteration"];
    const ys = t.columns[yCol];
    const pieces: string[] = [];
    for (let i = 0; i < xs.length; i++) {
      if (spec.logY && ys[i] <= 0) continue;
      pieces.push(`${fmt(sx.toPixel(xs[i]))},${fmt(sy.toPixel(ys[i]))}`);
    }
    const color = PALETTE[k % PALETTE.length];
    const dashed = t.label.endsWith("nokdl");
    const dash = dashed ? ` stroke-dasharray="5,4"` : "";
    parts.push(`<polyline class="trace" data-label="${escapeXml(t.label)}" fill="none" stroke="${color}" stroke-width="1.6"${dash} points="${pieces.join(" ")}"/>`);
  });

  // legend
  spec.traces.forEach((t, k) => {
    const ly = MARGIN.top + 16 * k + 8;
    const color = PALETTE[k % PALETTE.length];
    const dash = t.label.endsWith("nokdl") ? ` stroke-dasharray="5,4"` : "";
    parts.push(`<line x1="${x1 - 150}" y1="${ly}" x2="${x1 - 122}" y2="${ly}" stroke="${color}" stroke-width="2"${dash}/>`);
    parts.push(`<text x="${x1 - 116}" y="${ly + 4}" font-family="sans-serif" font-size="11">${escapeXml(t.label)}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
