import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";
import { parseObservableCsv } from "../src/csv.js";
import { renderComparison } from "../src/figure.js";

const FIXTURES = new URL("./fixtures/", import.meta.url);

function series(name: string) {
  return parseObservableCsv(readFileSync(new URL(name, FIXTURES), "utf8"), name);
}

describe("renderComparison", () => {
  const prim = series("fig2_primitive.csv");
  const ec = series("fig2_energy_conserving.csv");
  const ecLong = series("fig2ec_long.csv");

  it("renders valid two-panel SVG from real simulator output", () => {
    const svg = renderComparison({ primitive: prim, energyConserving: ec, title: "fig2" });
    expect(svg).toMatch(/^<svg xmlns=/);
    expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
    // two panel frames, both marker shapes, a title and a legend
    expect(svg.match(/<rect x=/g)?.length).toBe(2);
    expect(svg).toContain("<polygon");
    expect(svg).toContain("<circle");
    expect(svg).toContain(">fig2</text>");
    expect(svg).toContain("primitive</text>");
    expect(svg).toContain("energy-conserving</text>");
    expect(svg).toContain("weight variance (log)");
  });

  it("is byte-stable across renders", () => {
    const a = renderComparison({ primitive: prim, energyConserving: ec });
    const b = renderComparison({ primitive: prim, energyConserving: ec });
    expect(a).toBe(b);
  });

  it("renders series of different lengths on one shared axis", () => {
    const svg = renderComparison({ primitive: prim, energyConserving: ecLong });
    // the x axis must extend to the longer series' final time (t = 40)
    expect(svg).toContain(">40</text>");
  });

  it("draws one error bar and one marker per data row", () => {
    const svg = renderComparison({ primitive: prim, energyConserving: ec });
    const triangles = svg.match(/<polygon/g)?.length ?? 0;
    // data markers plus one legend triangle
    expect(triangles).toBe(prim.t.length + 1);
  });

  it("refuses mismatched time grids", () => {
    const shifted = { ...ec, t: ec.t.map((t) => t + 0.123) };
    expect(() => renderComparison({ primitive: prim, energyConserving: shifted })).toThrow(
      /mismatched time grids/,
    );
  });
});
