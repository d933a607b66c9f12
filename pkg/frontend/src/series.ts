/** Series helpers: head trimming, medians and interquartile bands. */

export interface Band {
  lower: number[];
  upper: number[];
}

/** Number of points kept after dropping the first trim*T months. */
export function keptPoints(total: number, trim: number): number {
  if (trim < 0 || trim >= 1) {
    throw new RangeError(`trim must be in [0, 1), got ${trim}`);
  }
  return Math.floor(total * (1 - trim));
}

/** Drop the burn-in head, keeping floor(T*(1-trim)) points. */
export function trimHead<T>(values: T[], trim: number): T[] {
  return values.slice(values.length - keptPoints(values.length, trim));
}

export function median(values: number[]): number {
  if (values.length === 0) return NaN;
  const xs = [...values].sort((a, b) => a - b);
  const mid = Math.floor(xs.length / 2);
  return xs.length % 2 ? xs[mid]! : (xs[mid - 1]! + xs[mid]!) / 2;
}

/** Linear-interpolation quantile, q in [0, 1]. */
export function quantile(values: number[], q: number): number {
  if (values.length === 0) return NaN;
  const xs = [...values].sort((a, b) => a - b);
  const pos = (xs.length - 1) * q;
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) return xs[lo]!;
  return xs[lo]! + (xs[hi]! - xs[lo]!) * (pos - lo);
}

/** Pointwise median across runs (rows: one series per run). */
export function medianSeries(runs: number[][]): number[] {
  const length = Math.min(...runs.map((r) => r.length));
  return Array.from({ length }, (_, i) => median(runs.map((r) => r[i]!)));
}

/** Pointwise interquartile band across runs. */
export function interquartileBand(runs: number[][]): Band {
  const length = Math.min(...runs.map((r) => r.length));
  const lower: number[] = [];
  const upper: number[] = [];
  for (let i = 0; i < length; i++) {
    const column = runs.map((r) => r[i]!);
    lower.push(quantile(column, 0.25));
    upper.push(quantile(column, 0.75));
  }
  return { lower, upper };
}
