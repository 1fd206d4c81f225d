/**
 * Deterministic SVG renderer for the two-scheme comparison figure: the
 * observable with error bars in the top panel (triangles for the primitive
 * scheme, filled circles for the energy-conserving one) and the weight
 * variance on a logarithmic scale in the bottom panel.
 *
 * Output is a pure function of the parsed series, so re-rendering the same
 * inputs is byte-stable.
 */
import { assertSharedTimeGrid, ObservableSeries } from "./csv.js";

export interface FigureSpec {
  primitive: ObservableSeries;
  energyConserving: ObservableSeries;
  title?: string;
  width?: number;
  height?: number;
}

interface Scale {
  (v: number): number;
}

const PRIMITIVE_COLOR = "#c0392b";
const ENERGY_COLOR = "#1a5276";

function fmt(v: number): string {
  // fixed short representation keeps the SVG byte-stable and readable
  return Number(v.toPrecision(6)).toString();
}

function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const span = hi - lo || 1;
  return (v) => outLo + ((v - lo) / span) * (outHi - outLo);
}

function niceTicks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = span / count / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = mult * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12 * span; v += s) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.floor(lo); e <= Math.ceil(hi); e++) {
    if (e >= lo - 1e-9 && e <= hi + 1e-9) ticks.push(e);
  }
  return ticks;
}

function triangle(x: number, y: number, r: number, color: string): string {
  const pts = [
    [x, y - r],
    [x - 0.866 * r, y + 0.5 * r],
    [x + 0.866 * r, y + 0.5 * r],
  ]
    .map(([px, py]) => `${fmt(px!)},${fmt(py!)}`)
    .join(" ");
  return `<polygon points="${pts}" fill="none" stroke="${color}" stroke-width="1.2"/>`;
}

function circle(x: number, y: number, r: number, color: string): string {
  return `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${fmt(r)}" fill="${color}"/>`;
}

function errorBar(x: number, y0: number, y1: number, color: string): string {
  return (
    `<line x1="${fmt(x)}" y1="${fmt(y0)}" x2="${fmt(x)}" y2="${fmt(y1)}" ` +
    `stroke="${color}" stroke-width="1"/>`
  );
}

function polyline(xs: number[], ys: number[], color: string, dash = ""): string {
  const pts = xs.map((x, i) => `${fmt(x)},${fmt(ys[i]!)}`).join(" ");
  const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
  return `<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.3"${dashAttr}/>`;
}

export function renderComparison(spec: FigureSpec): string {
  const prim = spec.primitive;
  const ec = spec.energyConserving;
  assertSharedTimeGrid(prim, ec, "primitive", "energy-conserving");

  const width = spec.width ?? 760;
  const height = spec.height ?? 560;
  const margin = { left: 64, right: 20, top: 40, bottom: 40 };
  const panelGap = 40;
  const panelH = (height - margin.top - margin.bottom - panelGap) / 2;
  const x0 = margin.left;
  const x1 = width - margin.right;
  const topY0 = margin.top;
  const topY1 = margin.top + panelH;
  const botY0 = topY1 + panelGap;
  const botY1 = botY0 + panelH;

  const tMax = Math.max(prim.t[prim.t.length - 1]!, ec.t[ec.t.length - 1]!);
  const xScale = linearScale(0, tMax, x0, x1);

  const allMeans = [
    ...prim.mean.map((m, i) => [m - prim.stderr[i]!, m + prim.stderr[i]!]),
    ...ec.mean.map((m, i) => [m - ec.stderr[i]!, m + ec.stderr[i]!]),
  ].flat();
  const yLo = Math.min(-1, ...allMeans);
  const yHi = Math.max(1, ...allMeans);
  const pad = 0.05 * (yHi - yLo);
  const yScale = linearScale(yLo - pad, yHi + pad, topY1, topY0);

  const logVals = [...prim.weight_var, ...ec.weight_var]
    .filter((v) => v > 0)
    .map((v) => Math.log10(v));
  const lLo = logVals.length ? Math.min(...logVals, 0) : 0;
  const lHi = logVals.length ? Math.max(...logVals, 1) : 1;
  const lScale = linearScale(lLo - 0.3, lHi + 0.3, botY1, botY0);
  const logY = (v: number): number | null => (v > 0 ? lScale(Math.log10(v)) : null);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  if (spec.title) {
    parts.push(
      `<text x="${fmt(width / 2)}" y="22" text-anchor="middle" font-size="15">${spec.title}</text>`,
    );
  }

  // panel frames
  for (const [py0, py1] of [
    [topY0, topY1],
    [botY0, botY1],
  ] as const) {
    parts.push(
      `<rect x="${fmt(x0)}" y="${fmt(py0)}" width="${fmt(x1 - x0)}" height="${fmt(py1 - py0)}" ` +
        `fill="none" stroke="#333" stroke-width="1"/>`,
    );
  }

  // x ticks on both panels
  for (const t of niceTicks(0, tMax)) {
    const x = xScale(t);
    for (const py of [topY1, botY1]) {
      parts.push(
        `<line x1="${fmt(x)}" y1="${fmt(py)}" x2="${fmt(x)}" y2="${fmt(py - 5)}" stroke="#333"/>`,
      );
      parts.push(
        `<text x="${fmt(x)}" y="${fmt(py + 16)}" text-anchor="middle">${fmt(t)}</text>`,
      );
    }
  }
  // y ticks, top panel
  for (const v of niceTicks(yLo - pad, yHi + pad)) {
    const y = yScale(v);
    parts.push(`<line x1="${fmt(x0)}" y1="${fmt(y)}" x2="${fmt(x0 + 5)}" y2="${fmt(y)}" stroke="#333"/>`);
    parts.push(`<text x="${fmt(x0 - 8)}" y="${fmt(y + 4)}" text-anchor="end">${fmt(v)}</text>`);
  }
  // y ticks, bottom panel (log scale)
  for (const e of logTicks(lLo - 0.3, lHi + 0.3)) {
    const y = lScale(e);
    parts.push(`<line x1="${fmt(x0)}" y1="${fmt(y)}" x2="${fmt(x0 + 5)}" y2="${fmt(y)}" stroke="#333"/>`);
    parts.push(`<text x="${fmt(x0 - 8)}" y="${fmt(y + 4)}" text-anchor="end">1e${fmt(e)}</text>`);
  }

  // axis labels
  parts.push(
    `<text x="${fmt((x0 + x1) / 2)}" y="${fmt(height - 6)}" text-anchor="middle">t</text>`,
  );
  parts.push(
    `<text x="16" y="${fmt((topY0 + topY1) / 2)}" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${fmt((topY0 + topY1) / 2)})">observable</text>`,
  );
  parts.push(
    `<text x="16" y="${fmt((botY0 + botY1) / 2)}" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${fmt((botY0 + botY1) / 2)})">weight variance (log)</text>`,
  );

  // top panel: mean with error bars
  const drawSeries = (
    s: ObservableSeries,
    color: string,
    marker: (x: number, y: number) => string,
    dash: string,
  ) => {
    parts.push(polyline(s.t.map(xScale), s.mean.map(yScale), color, dash));
    for (let i = 0; i < s.t.length; i++) {
      const x = xScale(s.t[i]!);
      const y = yScale(s.mean[i]!);
      parts.push(errorBar(x, yScale(s.mean[i]! - s.stderr[i]!), yScale(s.mean[i]! + s.stderr[i]!), color));
      parts.push(marker(x, y));
    }
  };
  drawSeries(prim, PRIMITIVE_COLOR, (x, y) => triangle(x, y, 4, PRIMITIVE_COLOR), "5,3");
  drawSeries(ec, ENERGY_COLOR, (x, y) => circle(x, y, 3, ENERGY_COLOR), "");

  // bottom panel: weight variance on log scale
  const drawLog = (s: ObservableSeries, color: string, dash: string) => {
    const xs: number[] = [];
    const ys: number[] = [];
    for (let i = 0; i < s.t.length; i++) {
      const y = logY(s.weight_var[i]!);
      if (y !== null) {
        xs.push(xScale(s.t[i]!));
        ys.push(y);
      }
    }
    if (xs.length > 1) parts.push(polyline(xs, ys, color, dash));
    for (let i = 0; i < xs.length; i++) {
      parts.push(circle(xs[i]!, ys[i]!, 2, color));
    }
  };
  drawLog(prim, PRIMITIVE_COLOR, "5,3");
  drawLog(ec, ENERGY_COLOR, "");

  // legend
  const lx = x0 + 12;
  const ly = topY0 + 16;
  parts.push(triangle(lx, ly - 4, 4, PRIMITIVE_COLOR));
  parts.push(`<text x="${fmt(lx + 10)}" y="${fmt(ly)}" fill="${PRIMITIVE_COLOR}">primitive</text>`);
  parts.push(circle(lx, ly + 14, 3, ENERGY_COLOR));
  parts.push(
    `<text x="${fmt(lx + 10)}" y="${fmt(ly + 18)}" fill="${ENERGY_COLOR}">energy-conserving</text>`,
  );

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
