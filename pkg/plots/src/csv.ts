/**
 * Reader for the benchmark harness CSV schema.
 *
 * The schema is fixed and ordered; anything else is rejected with an error
 * naming the first offending column so a mismatched file is easy to spot.
 */
import { readFileSync } from "fs";

export const CSV_COLUMNS = [
  "nu",
  "seconds",
  "egrads",
  "f",
  "gap",
  "test_acc",
  "s",
  "s_H",
  "R",
  "delta",
  "accepted",
  "tau",
  "b",
  "a",
] as const;

export type ColumnName = (typeof CSV_COLUMNS)[number];

export interface RunTable {
  /** Source path, kept for error messages. */
  path: string;
  /** Column-major numeric data; NaN marks missing values. */
  columns: Map<ColumnName, number[]>;
  /** Number of data rows. */
  length: number;
}

export class SchemaError extends Error {}

export function parseRunCsv(text: string, path = "<string>"): RunTable {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty file`);
  }
  const header = lines[0].split(",");
  for (let i = 0; i < CSV_COLUMNS.length; i++) {
    if (header[i] !== CSV_COLUMNS[i]) {
      throw new SchemaError(
        `${path}: expected column ${i + 1} to be "${CSV_COLUMNS[i]}", found "${header[i] ?? "<missing>"}"`,
      );
    }
  }
  if (header.length !== CSV_COLUMNS.length) {
    throw new SchemaError(
      `${path}: unexpected extra column "${header[CSV_COLUMNS.length]}"`,
    );
  }

  const columns = new Map<ColumnName, number[]>(
    CSV_COLUMNS.map((name) => [name, []]),
  );
  for (let row = 1; row < lines.length; row++) {
    const fields = lines[row].split(",");
    if (fields.length !== CSV_COLUMNS.length) {
      throw new SchemaError(
        `${path}: row ${row} has ${fields.length} fields, expected ${CSV_COLUMNS.length}`,
      );
    }
    for (let i = 0; i < CSV_COLUMNS.length; i++) {
      const value = Number(fields[i]);
      if (Number.isNaN(value) && fields[i] !== "nan" && fields[i] !== "-nan") {
        throw new SchemaError(
          `${path}: row ${row}, column "${CSV_COLUMNS[i]}": not a number: "${fields[i]}"`,
        );
      }
      columns.get(CSV_COLUMNS[i])!.push(value);
    }
  }
  return { path, columns, length: lines.length - 1 };
}

export function readRunCsv(path: string): RunTable {
  return parseRunCsv(readFileSync(path, "utf8"), path);
}
