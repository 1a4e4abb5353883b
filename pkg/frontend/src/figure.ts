/**
 * Deterministic SVG line figures. No DOM, no timestamps: identical input
 * produces identical bytes. Each panel carries its axis domains as data
 * attributes and clips series to the plot area, so axis bounds hold no
 * matter what the data does.
 */

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
}

export interface PanelSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  xDomain: [number, number];
  yDomain: [number, number];
  series: Series[];
}

const PANEL_WIDTH = 420;
const PANEL_HEIGHT = 340;
const MARGIN = { top: 42, right: 16, bottom: 48, left: 64 };
const TICK_COUNT = 5;

function fmt(value: number): string {
  // shortest stable tick/coordinate representation
  const rounded = Number(value.toFixed(4));
  return String(rounded);
}

function scale(domain: [number, number], range: [number, number]) {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const k = (r1 - r0) / (d1 - d0);
  return (v: number) => r0 + (v - d0) * k;
}

function ticks(domain: [number, number], count: number): number[] {
  const [lo, hi] = domain;
  const out: number[] = [];
  for (let i = 0; i < count; i++) {
    out.push(lo + ((hi - lo) * i) / (count - 1));
  }
  return out;
}

export function sortStrictlyIncreasing(xs: number[], ys: number[][]): { x: number[]; ys: number[][] } {
  const order = xs.map((_, i) => i).sort((a, b) => xs[a] - xs[b]);
  const x = order.map((i) => xs[i]);
  for (let i = 1; i < x.length; i++) {
    if (!(x[i] > x[i - 1])) {
      throw new Error(`x values not strictly increasing after sort (at index ${i})`);
    }
  }
  return { x, ys: ys.map((col) => order.map((i) => col[i])) };
}

function polyline(series: Series, sx: (v: number) => number, sy: (v: number) => number): string {
  const pts = series.x
    .map((xv, i) => `${fmt(sx(xv))},${fmt(sy(series.y[i]))}`)
    .join(" ");
  return `<polyline fill="none" stroke="${series.color}" stroke-width="1.8" points="${pts}"/>`;
}

export function renderPanel(spec: PanelSpec, offsetX: number, clipId: string): string {
  const x0 = MARGIN.left;
  const x1 = PANEL_WIDTH - MARGIN.right;
  const y0 = PANEL_HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  const sx = scale(spec.xDomain, [x0, x1]);
  const sy = scale(spec.yDomain, [y0, y1]);

  const parts: string[] = [];
  parts.push(
    `<g transform="translate(${offsetX},0)" class="panel" ` +
      `data-x-domain="${spec.xDomain[0]},${spec.xDomain[1]}" ` +
      `data-y-domain="${spec.yDomain[0]},${spec.yDomain[1]}">`
  );
  parts.push(
    `<clipPath id="${clipId}"><rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}"/></clipPath>`
  );
  parts.push(`<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" fill="none" stroke="#333"/>`);
  parts.push(`<text x="${(x0 + x1) / 2}" y="22" text-anchor="middle" font-size="14">${spec.title}</text>`);

  for (const t of ticks(spec.xDomain, TICK_COUNT)) {
    const px = fmt(sx(t));
    parts.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 4}" stroke="#333"/>`);
    parts.push(`<text x="${px}" y="${y0 + 18}" text-anchor="middle" font-size="10">${fmt(t)}</text>`);
  }
  for (const t of ticks(spec.yDomain, TICK_COUNT)) {
    const py = fmt(sy(t));
    parts.push(`<line x1="${x0 - 4}" y1="${py}" x2="${x0}" y2="${py}" stroke="#333"/>`);
    parts.push(`<text x="${x0 - 8}" y="${py}" text-anchor="end" dominant-baseline="middle" font-size="10">${fmt(t)}</text>`);
  }
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${PANEL_HEIGHT - 10}" text-anchor="middle" font-size="12">${spec.xLabel}</text>`
  );
  parts.push(
    `<text transform="translate(16,${(y0 + y1) / 2}) rotate(-90)" text-anchor="middle" font-size="12">${spec.yLabel}</text>`
  );

  parts.push(`<g clip-path="url(#${clipId})">`);
  for (const s of spec.series) {
    parts.push(polyline(s, sx, sy));
  }
  parts.push(`</g>`);

  if (spec.series.length > 1) {
    spec.series.forEach((s, i) => {
      const ly = y1 + 14 + 16 * i;
      parts.push(`<line x1="${x1 - 90}" y1="${ly}" x2="${x1 - 70}" y2="${ly}" stroke="${s.color}" stroke-width="1.8"/>`);
      parts.push(`<text x="${x1 - 64}" y="${ly + 3}" font-size="10">${s.label}</text>`);
    });
  }
  parts.push(`</g>`);
  return parts.join("\n");
}

export function renderFigure(panels: PanelSpec[]): string {
  const width = PANEL_WIDTH * panels.length;
  const body = panels
    .map((panel, i) => renderPanel(panel, i * PANEL_WIDTH, `clip${i}`))
    .join("\n");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${PANEL_HEIGHT}" ` +
    `viewBox="0 0 ${width} ${PANEL_HEIGHT}" font-family="Helvetica, Arial, sans-serif">\n` +
    `${body}\n</svg>\n`
  );
}
