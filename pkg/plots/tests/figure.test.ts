import { describe, expect, it } from "vitest";

import { readRunCsv } from "../src/csv.js";
import { extractSeries, FigureError, FigureSpec, render } from "../src/figure.js";

const fixture = (name: string) =>
  new URL(`./fixtures/${name}`, import.meta.url).pathname;

const ASTR = readRunCsv(fixture("astr_seed1.csv"));
const TR = readRunCsv(fixture("tr_seed1.csv"));
const SGD = readRunCsv(fixture("sgd_seed1.csv"));
const SVRG = readRunCsv(fixture("svrg_seed1.csv"));

function gapSpec(): FigureSpec {
  return { inputs: [{ table: ASTR, label: "ASTR" }], x: "egrads", y: "gap", logy: true };
}

function seriesPaths(svg: string): string[] {
  return svg.match(/<path class="series"[^>]*>/g) ?? [];
}

describe("extractSeries", () => {
  it("keeps every CSV row as a point, in order", () => {
    const series = extractSeries(gapSpec());
    expect(series).toHaveLength(1);
    const egrads = ASTR.columns.get("egrads")!;
    const gap = ASTR.columns.get("gap")!;
    expect(series[0].points.map((p) => p.x)).toEqual(egrads);
    expect(series[0].points.map((p) => p.y)).toEqual(gap);
  });

  it("splits the sample-size panel into s and s_H step series", () => {
    const spec: FigureSpec = {
      inputs: [{ table: ASTR, label: "ASTR" }], x: "egrads", y: "s", logy: false,
    };
    const series = extractSeries(spec);
    expect(series.map((s) => s.label)).toEqual(["ASTR s", "ASTR s_H"]);
    expect(series.every((s) => s.step)).toBe(true);
  });

  it("requires at least one input", () => {
    expect(() =>
      extractSeries({ inputs: [], x: "egrads", y: "gap", logy: false }),
    ).toThrowError(FigureError);
  });
});

describe("render", () => {
  it("draws a single gap series with a log y axis and monotone x", () => {
    const svg = render(gapSpec());
    expect(seriesPaths(svg)).toHaveLength(1);
    expect(svg).toContain('class="y-axis" data-scale="log"');
    const xs = extractSeries(gapSpec())[0].points.map((p) => p.x);
    const sorted = [...xs].sort((a, b) => a - b);
    expect(xs).toEqual(sorted);
  });

  it("renders four labeled series with a legend", () => {
    const spec: FigureSpec = {
      inputs: [
        { table: ASTR, label: "ASTR" },
        { table: TR, label: "TR" },
        { table: SGD, label: "SGD" },
        { table: SVRG, label: "SVRG" },
      ],
      x: "egrads",
      y: "gap",
      logy: true,
    };
    const svg = render(spec);
    const paths = seriesPaths(svg);
    expect(paths).toHaveLength(4);
    for (const label of ["ASTR", "TR", "SGD", "SVRG"]) {
      expect(svg).toContain(`data-label="${label}"`);
    }
    expect(svg).toContain('class="legend"');
    expect(svg).toContain('data-series="4"');
  });

  it("is deterministic for identical inputs", () => {
    expect(render(gapSpec())).toBe(render(gapSpec()));
  });

  it("renders linear axes when logy is off", () => {
    const spec: FigureSpec = {
      inputs: [{ table: ASTR, label: "ASTR" }], x: "egrads", y: "test_acc", logy: false,
    };
    const svg = render(spec);
    expect(svg).toContain('class="y-axis" data-scale="linear"');
  });

  it("rejects a log axis when no positive values exist", () => {
    const spec: FigureSpec = {
      inputs: [{ table: ASTR, label: "ASTR" }], x: "egrads", y: "R", logy: true,
    };
    // R column contains 0 in the initial row but positive values later; force
    // the failure with test_acc scaled to zero instead: use a synthetic table
    const zeroed = {
      ...ASTR,
      columns: new Map(ASTR.columns),
    };
    zeroed.columns.set("R", ASTR.columns.get("R")!.map(() => 0));
    expect(() =>
      render({ ...spec, inputs: [{ table: zeroed, label: "Z" }] }),
    ).toThrowError(FigureError);
  });

  it("escapes labels in the svg output", () => {
    const svg = render({
      inputs: [{ table: ASTR, label: "a<b>&c" }], x: "egrads", y: "gap", logy: true,
    });
    expect(svg).toContain("a&lt;b&gt;&amp;c");
  });
});
