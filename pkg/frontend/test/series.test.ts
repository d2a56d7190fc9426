import { describe, expect, it } from "vitest";
import * as fs from "fs";
import * as path from "path";

import { renderSeries } from "../src/series";

const FIXTURES = path.join(__dirname, "fixtures");
const parametric = fs.readFileSync(
  path.join(FIXTURES, "timeseries_parametric.csv"),
  "utf-8",
);
const twoModels = fs.readFileSync(
  path.join(FIXTURES, "timeseries_two_models.csv"),
  "utf-8",
);

describe("time-series rendering", () => {
  it("overlays the dashed ideal-squeezer reference on a parametric run", () => {
    const svg = renderSeries(parametric);
    expect(svg).toContain("stroke-dasharray");
    expect(svg).toContain("1/dp ref");
    expect(svg).toContain("dx / x0");
    // STLR and qubit panels are absent for an NMR-only model
    expect(svg).not.toContain("&lt;n_a&gt;");
  });

  it("adds a deviation panel when two models share the grid", () => {
    const svg = renderSeries(twoModels);
    expect(svg).toContain("full-rwa");
    expect(svg).toContain("pdc");
    expect(svg).toContain("dev: full-rwa vs pdc");
  });

  it("fails cleanly on an empty CSV", () => {
    const header =
      "t,model,exp_nb,exp_na,dx_over_x0,dp_over_p0,qubit_ground_pop,leakage\n";
    expect(() => renderSeries(header)).toThrowError(/no data rows/);
  });

  it("names a missing column", () => {
    expect(() => renderSeries("t,model\n1,pdc\n")).toThrowError(
      /missing required column: exp_nb/,
    );
  });
});
