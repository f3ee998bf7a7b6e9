import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { SchemaError, parseCsv } from "../src/csv.js";
import {
  REPORT_HEADER,
  parseSidecar,
  renderDimCurves,
  renderScatter,
  renderTauCurves,
} from "../src/figures.js";

const FIXTURES = join(__dirname, "fixtures");

function fixture(name: string): string {
  return readFileSync(join(FIXTURES, name), "utf-8");
}

describe("csv parsing", () => {
  it("accepts the published report schema", () => {
    const table = parseCsv(fixture("rates.csv"), REPORT_HEADER);
    expect(table.rows.length).toBe(7 * 4);
  });

  it("rejects an empty file", () => {
    expect(() => parseCsv("", REPORT_HEADER)).toThrow(SchemaError);
  });

  it("rejects a header-only file", () => {
    expect(() => parseCsv(REPORT_HEADER.join(",") + "\n", REPORT_HEADER)).toThrow(/no data rows/);
  });

  it("rejects a wrong header", () => {
    expect(() => parseCsv("a,b,c\n1,2,3\n", REPORT_HEADER)).toThrow(/header mismatch/);
  });

  it("rejects ragged rows", () => {
    const text = REPORT_HEADER.join(",") + "\n1,2,3\n";
    expect(() => parseCsv(text, REPORT_HEADER)).toThrow(/cells/);
  });
});

describe("scatter", () => {
  it("draws every point and the three boundary overlays", () => {
    const sidecar = parseSidecar(fixture("proj.csv.sidecar.json"));
    const svg = renderScatter(fixture("proj.csv"), sidecar);
    expect(svg).toContain("<svg");
    expect((svg.match(/<circle /g) ?? []).length).toBe(1000);
    expect(svg).toContain('stroke="#d62728"');
    expect(svg).toContain('stroke-dasharray="6 4"');
    expect(svg).toContain("class_boundary");
    expect(svg).toContain("query_difference");
    expect(svg).toContain("query_radius");
  });

  it("renders without a sidecar", () => {
    const svg = renderScatter(fixture("proj.csv"));
    expect(svg).not.toContain("class_boundary");
  });

  it("is deterministic", () => {
    const sidecar = parseSidecar(fixture("proj.csv.sidecar.json"));
    expect(renderScatter(fixture("proj.csv"), sidecar))
      .toBe(renderScatter(fixture("proj.csv"), sidecar));
  });

  it("rejects a report CSV", () => {
    expect(() => renderScatter(fixture("rates.csv"))).toThrow(SchemaError);
  });

  it("rejects a broken sidecar", () => {
    expect(() => parseSidecar("{}")).toThrow(/boundaries/);
    expect(() => parseSidecar("nope")).toThrow(/JSON/);
  });
});

describe("tau curves", () => {
  it("draws one line per dimension with 11 markers each", () => {
    const svg = renderTauCurves(fixture("tau.csv"));
    // 4 dims in the fixture; every series carries 11 tau points
    expect((svg.match(/dimensions</g) ?? []).length).toBe(4);
    expect((svg.match(/<circle /g) ?? []).length).toBe(4 * 11);
  });

  it("rejects reports without three-class rows", () => {
    const text = REPORT_HEADER.join(",") + "\n10,hilbert,,10,0.5,100,1\n";
    expect(() => renderTauCurves(text)).toThrow(/ptolemaic/);
  });

  it("rejects the projection schema", () => {
    expect(() => renderTauCurves(fixture("proj.csv"))).toThrow(/header mismatch/);
  });
});

describe("dim curves", () => {
  it("draws one labelled curve per mechanism", () => {
    const svg = renderDimCurves(fixture("rates.csv"));
    for (const name of ["hyperplane", "ptolemaic", "hilbert", "combined"]) {
      expect(svg).toContain(`>${name}<`);
    }
    expect((svg.match(/<polyline /g) ?? []).length).toBeGreaterThanOrEqual(4);
  });

  it("splits curves per pivot count when several are present", () => {
    const rows = [
      "8,combined,1,10,0.5,100,1",
      "8,combined,1,20,0.7,100,1",
      "10,combined,1,10,0.4,100,1",
      "10,combined,1,20,0.6,100,1",
    ];
    const svg = renderDimCurves(REPORT_HEADER.join(",") + "\n" + rows.join("\n") + "\n");
    expect(svg).toContain(">combined (10 pivots)<");
    expect(svg).toContain(">combined (20 pivots)<");
  });

  it("never modifies its input file", () => {
    const before = fixture("rates.csv");
    renderDimCurves(before);
    expect(fixture("rates.csv")).toBe(before);
  });
});
