/**
 * Time-series figure for the evolve command output: one panel per
 * observable, one trace per model block, shared time axis.
 *
 * When the file is a parametric-only run, the quadrature panel overlays a
 * dashed reference equal to 1/dp_over_p0 per row: for an ideal squeezer
 * dx = 1/dp, so the overlay visualizes the law using plotted numbers only.
 * When at least two models share the grid, a deviation panel
 * |exp_nb(model A) - exp_nb(model B)| is appended.
 */

import {
  columnIndex,
  CsvContractError,
  numberAt,
  parseCsv,
  requireColumns,
} from "./csv";
import { drawFrame, PALETTE, SvgDoc } from "./svg";

export const SERIES_COLUMNS = [
  "t",
  "model",
  "exp_nb",
  "exp_na",
  "dx_over_x0",
  "dp_over_p0",
  "qubit_ground_pop",
  "leakage",
];

const PANELS: { column: string; label: string }[] = [
  { column: "exp_nb", label: "<n_b>" },
  { column: "exp_na", label: "<n_a>" },
  { column: "dx_over_x0", label: "dx / x0" },
  { column: "dp_over_p0", label: "dp / p0" },
  { column: "qubit_ground_pop", label: "qubit ground pop." },
];

interface ModelSeries {
  model: string;
  t: number[];
  values: Map<string, (number | null)[]>;
}

export function renderSeries(csvText: string, options: {
  width?: number;
} = {}): string {
  const table = parseCsv(csvText);
  requireColumns(table, SERIES_COLUMNS);
  if (table.rows.length === 0) {
    throw new CsvContractError("timeseries CSV has no data rows");
  }
  const iT = columnIndex(table, "t");
  const iModel = columnIndex(table, "model");

  const models = new Map<string, ModelSeries>();
  for (const row of table.rows) {
    const model = String(row[iModel]);
    let series = models.get(model);
    if (!series) {
      series = { model, t: [], values: new Map() };
      for (const p of PANELS) series.values.set(p.column, []);
      models.set(model, series);
    }
    series.t.push(numberAt(row, iT, "t"));
    for (const p of PANELS) {
      const v = row[columnIndex(table, p.column)];
      series.values.get(p.column)!.push(typeof v === "number" ? v : null);
    }
  }
  const modelList = [...models.values()];

  // keep only panels where at least one model has data
  const activePanels = PANELS.filter((p) =>
    modelList.some((m) => m.values.get(p.column)!.some((v) => v !== null)),
  );
  const twoModelDeviation = modelList.length >= 2;
  const panelCount = activePanels.length + (twoModelDeviation ? 1 : 0);

  const width = options.width ?? 640;
  const panelHeight = 150;
  const height = 40 + panelCount * (panelHeight + 48);
  const doc = new SvgDoc(width, height);
  const tMax = Math.max(...modelList.flatMap((m) => m.t));

  let top = 24;
  for (const panel of activePanels) {
    const entries = modelList
      .map((m) => ({
        model: m.model,
        t: m.t,
        v: m.values.get(panel.column)!,
      }))
      .filter((e) => e.v.some((x) => x !== null));
    const all = entries.flatMap((e) => e.v.filter((x): x is number => x !== null));
    const lo = Math.min(0, ...all);
    const hi = Math.max(...all) * 1.05 || 1;
    const frame = drawFrame(
      doc,
      { left: 64, top, width: width - 120, height: panelHeight },
      [0, tMax],
      [lo, hi],
      "t",
      panel.label,
    );
    entries.forEach((e, k) => {
      const color = PALETTE[k % PALETTE.length];
      const pts: [number, number][] = [];
      e.t.forEach((t, i) => {
        const v = e.v[i];
        if (v !== null) pts.push([frame.x(t), frame.y(v)]);
      });
      doc.polyline(pts, color);
      doc.text(width - 52, top + 12 + 12 * k, e.model, { fill: color, size: 9 });
    });
    // ideal-squeezer reference on the dx panel of a parametric-only file
    if (panel.column === "dx_over_x0" && modelList.length === 1) {
      const m = modelList[0];
      const dp = m.values.get("dp_over_p0")!;
      const pts: [number, number][] = [];
      m.t.forEach((t, i) => {
        const v = dp[i];
        if (v !== null && v !== 0) pts.push([frame.x(t), frame.y(1 / v)]);
      });
      doc.polyline(pts, "#666", { dash: "5,4", width: 1 });
      doc.text(width - 52, top + 24, "1/dp ref", { fill: "#666", size: 9 });
    }
    top += panelHeight + 48;
  }

  if (twoModelDeviation) {
    const [m1, m2] = modelList;
    const n = Math.min(m1.t.length, m2.t.length);
    const dev: [number, number][] = [];
    const v1 = m1.values.get("exp_nb")!;
    const v2 = m2.values.get("exp_nb")!;
    const devVals: number[] = [];
    for (let i = 0; i < n; i++) {
      const a = v1[i];
      const b = v2[i];
      if (a !== null && b !== null) devVals.push(Math.abs(a - b));
    }
    const frame = drawFrame(
      doc,
      { left: 64, top, width: width - 120, height: panelHeight },
      [0, tMax],
      [0, Math.max(...devVals) * 1.1 || 1],
      "t",
      `|<n_b>| dev: ${m1.model} vs ${m2.model}`,
    );
    let j = 0;
    for (let i = 0; i < n; i++) {
      const a = v1[i];
      const b = v2[i];
      if (a !== null && b !== null) {
        dev.push([frame.x(m1.t[i]), frame.y(Math.abs(a - b))]);
        j += 1;
      }
    }
    doc.polyline(dev, PALETTE[3]);
  }

  return doc.render();
}
