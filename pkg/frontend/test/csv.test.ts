import { describe, expect, it } from "vitest";

import { booleanColumn, numericColumn, parseCsv } from "../src/csv.js";

const SAMPLE = "a,b,flag\n1,2.5,true\n3,nan,false\n";

describe("parseCsv", () => {
  it("splits header and rows", () => {
    const table = parseCsv(SAMPLE);
    expect(table.header).toEqual(["a", "b", "flag"]);
    expect(table.rows).toHaveLength(2);
  });

  it("rejects empty input", () => {
    expect(() => parseCsv("")).toThrow(/empty/);
  });

  it("rejects single-row files", () => {
    expect(() => parseCsv("a,b\n1,2\n")).toThrow(/at least 2/);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1,2\n3\n")).toThrow(/cells/);
  });
});

describe("columns", () => {
  it("parses numbers including nan", () => {
    const table = parseCsv(SAMPLE);
    expect(numericColumn(table, "a")).toEqual([1, 3]);
    const b = numericColumn(table, "b");
    expect(b[0]).toBe(2.5);
    expect(Number.isNaN(b[1])).toBe(true);
  });

  it("parses booleans", () => {
    expect(booleanColumn(parseCsv(SAMPLE), "flag")).toEqual([true, false]);
  });

  it("reports missing columns by name", () => {
    expect(() => numericColumn(parseCsv(SAMPLE), "zz")).toThrow(/missing column 'zz'/);
  });
});
