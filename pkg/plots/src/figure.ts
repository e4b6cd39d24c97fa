/**
 * SVG figure rendering for benchmark run logs.
 *
 * Rendering never alters or reorders the data: every CSV row becomes a point
 * of its series, in file order. On a log axis, nonpositive values cannot be
 * drawn; such points stay in the series (and break the polyline) but are
 * never dropped from the extracted data.
 */
import { curveStepAfter, line } from "d3-shape";
import { scaleLinear, scaleLog } from "d3-scale";

import { ColumnName, RunTable } from "./csv.js";

export type XAxis = "seconds" | "egrads";
export type YAxis = "gap" | "test_acc" | "s" | "R";

export interface SeriesInput {
  table: RunTable;
  label: string;
}

export interface FigureSpec {
  inputs: SeriesInput[];
  x: XAxis;
  y: YAxis;
  logy: boolean;
  width?: number;
  height?: number;
}

export interface Point {
  x: number;
  y: number;
}

export interface Series {
  label: string;
  /** Step series are drawn with a step-after curve (sample-size panels). */
  step: boolean;
  points: Point[];
}

export class FigureError extends Error {}

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

function column(table: RunTable, name: ColumnName): number[] {
  return table.columns.get(name)!;
}

function pairUp(xs: number[], ys: number[]): Point[] {
  return xs.map((x, i) => ({ x, y: ys[i] }));
}

/** One series per input, except the sample-size panel which adds s_H. */
export function extractSeries(spec: FigureSpec): Series[] {
  if (spec.inputs.length === 0) {
    throw new FigureError("at least one input series is required");
  }
  const series: Series[] = [];
  for (const { table, label } of spec.inputs) {
    if (table.length === 0) {
      throw new FigureError(`${table.path}: no data rows`);
    }
    const xs = column(table, spec.x);
    if (spec.y === "s") {
      series.push({ label: `${label} s`, step: true, points: pairUp(xs, column(table, "s")) });
      series.push({ label: `${label} s_H`, step: true, points: pairUp(xs, column(table, "s_H")) });
    } else {
      series.push({ label, step: false, points: pairUp(xs, column(table, spec.y)) });
    }
  }
  return series;
}

function niceExtent(values: number[], logScale: boolean): [number, number] {
  const finite = values.filter((v) => Number.isFinite(v) && (!logScale || v > 0));
  if (finite.length === 0) {
    throw new FigureError(
      logScale
        ? "no positive finite values to place on a log axis"
        : "no finite values to plot",
    );
  }
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (lo === hi) {
    // degenerate span: widen symmetrically so the scale stays invertible
    lo = logScale ? lo / 10 : lo - 1;
    hi = logScale ? hi * 10 : hi + 1;
  }
  return [lo, hi];
}

function formatTick(value: number, logScale: boolean): string {
  if (logScale) {
    const exp = Math.log10(value);
    if (Number.isInteger(exp)) return `1e${exp}`;
    return value.toExponential(0);
  }
  if (Math.abs(value) >= 1e5 || (value !== 0 && Math.abs(value) < 1e-3)) {
    return value.toExponential(1);
  }
  return String(Number(value.toPrecision(6)));
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Render the figure to an SVG string (deterministic for equal inputs). */
export function render(spec: FigureSpec): string {
  const width = spec.width ?? 720;
  const height = spec.height ?? 480;
  const margin = { top: 24, right: 24, bottom: 48, left: 72 };
  const innerW = width - margin.left - margin.right;
  const innerH = height - margin.top - margin.bottom;

  const series = extractSeries(spec);
  const allX = series.flatMap((s) => s.points.map((p) => p.x));
  const allY = series.flatMap((s) => s.points.map((p) => p.y));

  const xScale = scaleLinear().domain(niceExtent(allX, false)).range([0, innerW]);
  const yScale = (spec.logy ? scaleLog() : scaleLinear())
    .domain(niceExtent(allY, spec.logy))
    .range([innerH, 0]);

  const defined = (p: Point) =>
    Number.isFinite(p.x) && Number.isFinite(p.y) && (!spec.logy || p.y > 0);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" data-series="${series.length}" ` +
      `data-x="${spec.x}" data-y="${spec.y}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(`<g transform="translate(${margin.left},${margin.top})">`);

  // axes
  const xTicks = xScale.ticks(8);
  const yTicks = spec.logy ? yScale.ticks() : yScale.ticks(8);
  parts.push(`<g class="x-axis" data-scale="linear">`);
  parts.push(
    `<line x1="0" y1="${innerH}" x2="${innerW}" y2="${innerH}" stroke="black"/>`,
  );
  for (const t of xTicks) {
    const px = xScale(t);
    parts.push(
      `<line x1="${px}" y1="${innerH}" x2="${px}" y2="${innerH + 5}" stroke="black"/>` +
        `<text x="${px}" y="${innerH + 18}" text-anchor="middle">${formatTick(t, false)}</text>`,
    );
  }
  parts.push(
    `<text x="${innerW / 2}" y="${innerH + 36}" text-anchor="middle">${escapeXml(spec.x)}</text>`,
  );
  parts.push(`</g>`);

  parts.push(`<g class="y-axis" data-scale="${spec.logy ? "log" : "linear"}">`);
  parts.push(`<line x1="0" y1="0" x2="0" y2="${innerH}" stroke="black"/>`);
  for (const t of yTicks) {
    if (spec.logy && Math.abs(Math.log10(t) - Math.round(Math.log10(t))) > 1e-9) {
      continue; // decade labels only; minor ticks would crowd the axis
    }
    const py = yScale(t);
    parts.push(
      `<line x1="-5" y1="${py}" x2="0" y2="${py}" stroke="black"/>` +
        `<text x="-8" y="${py + 4}" text-anchor="end">${formatTick(t, spec.logy)}</text>`,
    );
  }
  parts.push(
    `<text transform="translate(${-margin.left + 16},${innerH / 2}) rotate(-90)" ` +
      `text-anchor="middle">${escapeXml(spec.y)}</text>`,
  );
  parts.push(`</g>`);

  // series polylines
  series.forEach((s, idx) => {
    const gen = line<Point>()
      .x((p) => xScale(p.x))
      .y((p) => yScale(p.y))
      .defined(defined);
    if (s.step) gen.curve(curveStepAfter);
    const d = gen(s.points);
    if (d === null || d.length === 0) {
      throw new FigureError(`series "${s.label}" has no drawable points`);
    }
    parts.push(
      `<path class="series" data-label="${escapeXml(s.label)}" data-step="${s.step}" ` +
        `data-points="${s.points.length}" d="${d}" fill="none" ` +
        `stroke="${PALETTE[idx % PALETTE.length]}" stroke-width="1.5"/>`,
    );
  });

  // legend
  parts.push(`<g class="legend" transform="translate(${innerW - 150},8)">`);
  series.forEach((s, idx) => {
    const y = idx * 18;
    parts.push(
      `<line x1="0" y1="${y}" x2="20" y2="${y}" stroke="${PALETTE[idx % PALETTE.length]}" stroke-width="2"/>` +
        `<text x="26" y="${y + 4}">${escapeXml(s.label)}</text>`,
    );
  });
  parts.push(`</g>`);

  parts.push(`</g>`);
  parts.push(`</svg>`);
  return parts.join("\n");
}
