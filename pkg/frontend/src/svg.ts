/** Minimal self-contained SVG line-chart renderer (no DOM, no deps). */

export interface Series {
  label: string;
  x: number[];
  /** NaN entries break the line, leaving a gap. */
  y: number[];
}

export interface BandData {
  x: number[];
  lower: number[];
  upper: number[];
}

export interface Chart {
  title: string;
  footer?: string;
  series: Series[];
  band?: BandData;
  width?: number;
  height?: number;
  yLabel?: string;
}

const PALETTE = [
  "#2e86ab",
  "#a23b72",
  "#6a994e",
  "#f18f01",
  "#8b5cf6",
  "#e74c3c",
  "#0ea5e9",
  "#374151",
];

const MARGIN = { top: 36, right: 16, bottom: 44, left: 64 };

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isNaN(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo === Infinity) return [0, 1];
  if (lo === hi) return [lo - 0.5, hi + 0.5];
  return [lo, hi];
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const fmt = (v: number) => Number(v.toPrecision(6)).toString();

export function renderLineChart(chart: Chart): string {
  const width = chart.width ?? 640;
  const height = chart.height ?? 400;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const xs = chart.series.flatMap((s) => s.x).concat(chart.band?.x ?? []);
  const ys = chart.series
    .flatMap((s) => s.y)
    .concat(chart.band ? chart.band.lower.concat(chart.band.upper) : []);
  const [x0, x1] = extent(xs);
  const [y0, y1] = extent(ys);
  const sx = (x: number) => MARGIN.left + ((x - x0) / (x1 - x0)) * plotW;
  const sy = (y: number) => MARGIN.top + plotH - ((y - y0) / (y1 - y0)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
      `font-family="sans-serif" font-size="11">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="20" text-anchor="middle" font-size="14" class="title">` +
      `${escapeXml(chart.title)}</text>`,
  );

  // axes with four ticks each
  const axisY = MARGIN.top + plotH;
  parts.push(
    `<line x1="${MARGIN.left}" y1="${axisY}" x2="${MARGIN.left + plotW}" y2="${axisY}" stroke="#333"/>`,
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${axisY}" stroke="#333"/>`,
  );
  for (let i = 0; i <= 4; i++) {
    const tx = x0 + ((x1 - x0) * i) / 4;
    const ty = y0 + ((y1 - y0) * i) / 4;
    parts.push(
      `<text x="${sx(tx)}" y="${axisY + 16}" text-anchor="middle" class="tick">${fmt(tx)}</text>`,
      `<text x="${MARGIN.left - 6}" y="${sy(ty) + 4}" text-anchor="end" class="tick">${fmt(ty)}</text>`,
    );
  }
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 14}" text-anchor="middle" class="axis-label">month</text>`,
  );
  if (chart.yLabel) {
    parts.push(
      `<text x="14" y="${MARGIN.top + plotH / 2}" text-anchor="middle" class="axis-label" ` +
        `transform="rotate(-90 14 ${MARGIN.top + plotH / 2})">${escapeXml(chart.yLabel)}</text>`,
    );
  }

  if (chart.band) {
    const { x, lower, upper } = chart.band;
    const forward = x.map((v, i) => `${fmt(sx(v))},${fmt(sy(upper[i]!))}`);
    const backward = [...x.keys()]
      .reverse()
      .map((i) => `${fmt(sx(x[i]!))},${fmt(sy(lower[i]!))}`);
    parts.push(
      `<path class="band" d="M ${forward.join(" L ")} L ${backward.join(" L ")} Z" ` +
        `fill="#2e86ab" fill-opacity="0.18" stroke="none"/>`,
    );
  }

  chart.series.forEach((series, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    let segment: string[] = [];
    const segments: string[][] = [];
    series.x.forEach((x, i) => {
      const y = series.y[i]!;
      if (Number.isNaN(y)) {
        if (segment.length) segments.push(segment);
        segment = [];
        return;
      }
      segment.push(`${fmt(sx(x))},${fmt(sy(y))}`);
    });
    if (segment.length) segments.push(segment);
    for (const points of segments) {
      parts.push(
        `<polyline class="series" data-label="${escapeXml(series.label)}" ` +
          `points="${points.join(" ")}" fill="none" stroke="${color}" stroke-width="1.5"/>`,
      );
    }
  });

  if (chart.footer) {
    parts.push(
      `<text x="${width / 2}" y="${height - 2}" text-anchor="middle" font-size="8" ` +
        `fill="#888" class="footer">${escapeXml(chart.footer)}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}

/** Data-point count of every series polyline, by label. */
export function countPolylinePoints(svg: string): Map<string, number> {
  const counts = new Map<string, number>();
  const regex = /<polyline class="series" data-label="([^"]*)" points="([^"]*)"/g;
  for (const match of svg.matchAll(regex)) {
    const label = match[1]!;
    const n = match[2]!.trim().split(/\s+/).filter(Boolean).length;
    counts.set(label, (counts.get(label) ?? 0) + n);
  }
  return counts;
}
