import { readFileSync } from "fs";
import { describe, expect, it } from "vitest";

import { CSV_COLUMNS, parseRunCsv, readRunCsv, SchemaError } from "../src/csv.js";

const FIXTURE = new URL("./fixtures/astr_seed1.csv", import.meta.url).pathname;

describe("parseRunCsv", () => {
  it("reads a harness log with every column present", () => {
    const table = readRunCsv(FIXTURE);
    expect(table.length).toBeGreaterThan(5);
    for (const name of CSV_COLUMNS) {
      expect(table.columns.get(name)).toHaveLength(table.length);
    }
    // egrads accumulate strictly
    const egrads = table.columns.get("egrads")!;
    for (let i = 1; i < egrads.length; i++) {
      expect(egrads[i]).toBeGreaterThan(egrads[i - 1]);
    }
  });

  it("names the offending column on header mismatch", () => {
    const text = readFileSync(FIXTURE, "utf8").replace("s_H", "sH");
    expect(() => parseRunCsv(text, "x.csv")).toThrowError(/"s_H"/);
  });

  it("rejects extra columns", () => {
    const lines = readFileSync(FIXTURE, "utf8").split("\n");
    lines[0] += ",bonus";
    expect(() => parseRunCsv(lines.join("\n"), "x.csv")).toThrowError(SchemaError);
  });

  it("rejects ragged rows with their row number", () => {
    const text = [CSV_COLUMNS.join(","), "1,2,3"].join("\n");
    expect(() => parseRunCsv(text, "x.csv")).toThrowError(/row 1/);
  });

  it("rejects non-numeric fields", () => {
    const row = Array(CSV_COLUMNS.length).fill("1");
    row[3] = "oops";
    const text = [CSV_COLUMNS.join(","), row.join(",")].join("\n");
    expect(() => parseRunCsv(text, "x.csv")).toThrowError(/"f"/);
  });

  it("accepts nan markers", () => {
    const row = Array(CSV_COLUMNS.length).fill("1");
    row[4] = "nan";
    const text = [CSV_COLUMNS.join(","), row.join(",")].join("\n");
    const table = parseRunCsv(text, "x.csv");
    expect(Number.isNaN(table.columns.get("gap")![0])).toBe(true);
  });

  it("rejects an empty file", () => {
    expect(() => parseRunCsv("", "x.csv")).toThrowError(/empty/);
  });
});
