import { describe, expect, it } from "vitest";

import { numericColumn, parseCsv, requireColumns } from "../src/csv.js";

describe("parseCsv", () => {
  it("splits header and rows", () => {
    const t = parseCsv("a,b\n1,2\n3,4\n");
    expect(t.columns).toEqual(["a", "b"]);
    expect(t.rows).toEqual([
      ["1", "2"],
      ["3", "4"],
    ]);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1\n")).toThrow(/row 1/);
  });

  it("rejects empty input", () => {
    expect(() => parseCsv("  \n ")).toThrow(/empty/);
  });
});

describe("requireColumns", () => {
  it("names every missing column", () => {
    const t = parseCsv("value,ecdf\n1,0.5\n");
    expect(() => requireColumns(t, ["value", "model_fluid", "model_hardcore"])).toThrow(
      "missing column(s): model_fluid, model_hardcore",
    );
  });
});

describe("numericColumn", () => {
  it("parses numbers", () => {
    const t = parseCsv("x\n1.5\n2.5e3\n");
    expect(numericColumn(t, "x")).toEqual([1.5, 2500]);
  });

  it("points at the offending cell", () => {
    const t = parseCsv("x\noops\n");
    expect(() => numericColumn(t, "x")).toThrow(/column x, row 1/);
  });
});
