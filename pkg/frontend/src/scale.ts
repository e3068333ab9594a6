/** Linear and log10 axis scales with round tick positions. */

export interface Scale {
  toPixel(v: number): number;
  ticks(): number[];
  transform(v: number): number;
}

export function linearScale(lo: number, hi: number, p0: number, p1: number): Scale {
  if (hi === lo) {
    hi = lo + 1;
    lo = lo - 1;
  }
  const span = hi - lo;
  const step = niceStep(span);
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= hi + 1e-12 * Math.abs(span); v += step) {
    ticks.push(roundTick(v, step));
  }
  return {
    toPixel: (v) => p0 + ((v - lo) / span) * (p1 - p0),
    ticks: () => ticks,
    transform: (v) => v,
  };
}

export function log10Scale(lo: number, hi: number, p0: number, p1: number): Scale {
  if (lo <= 0) throw new Error(`log scale needs positive bounds, got ${lo}`);
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi === lo ? lo * 10 : hi);
  const ticks: number[] = [];
  for (let e = Math.ceil(llo); e <= Math.floor(lhi); e++) ticks.push(Math.pow(10, e));
  if (ticks.length === 0) ticks.push(lo, hi);
  return {
    toPixel: (v) => p0 + ((Math.log10(v) - llo) / (lhi - llo)) * (p1 - p0),
    ticks: () => ticks,
    transform: (v) => Math.log10(v),
  };
}

function niceStep(span: number): number {
  const raw = span / 6;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const nice = norm < 1.5 ? 1 : norm < 3.5 ? 2 : norm < 7.5 ? 5 : 10;
  return nice * mag;
}

function roundTick(v: number, step: number): number {
  const digits = Math.max(0, -Math.floor(Math.log10(step)) + 1);
  return Number(v.toFixed(digits + 2 > 15 ? 15 : digits + 2));
}

export function formatTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) return v.toExponential(0);
  return String(Number(v.toPrecision(6)));
}
