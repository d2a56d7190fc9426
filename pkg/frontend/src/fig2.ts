/**
 * Squeezing-efficiency figure: dx/x0 versus the squeeze parameter, one curve
 * per noise ratio, labeled (a), (b), ... in ascending ratio, with optional
 * Monte-Carlo points (error-barred) and minima annotations from the sidecar.
 *
 * Every plotted number originates in the input files; nothing is recomputed.
 */

import {
  columnIndex,
  CsvContractError,
  CsvTable,
  numberAt,
  parseCsv,
  requireColumns,
} from "./csv";
import { drawFrame, PALETTE, SvgDoc, fmt } from "./svg";

export const FIG2_COLUMNS = [
  "xi",
  "r",
  "dx_over_x0_analytic",
  "dx_over_x0_mc",
  "mc_stderr",
];

export interface MinimaEntry {
  r: number;
  xi_star: number | null;
  dx_over_x0_min: number | null;
  boundary: boolean;
}

export interface MinimaFile {
  entries: MinimaEntry[];
  configDigest: string | null;
}

export interface Fig2Options {
  xLabel?: string;
  yLabel?: string;
  width?: number;
  height?: number;
  logY?: boolean;
}

interface Curve {
  r: number;
  xi: number[];
  dx: number[];
  mc: { xi: number; value: number; stderr: number }[];
}

function collectCurves(table: CsvTable): Curve[] {
  requireColumns(table, FIG2_COLUMNS);
  const iXi = columnIndex(table, "xi");
  const iR = columnIndex(table, "r");
  const iDx = columnIndex(table, "dx_over_x0_analytic");
  const iMc = columnIndex(table, "dx_over_x0_mc");
  const iSe = columnIndex(table, "mc_stderr");

  const byRatio = new Map<number, Curve>();
  for (const row of table.rows) {
    const r = numberAt(row, iR, "r");
    const xi = numberAt(row, iXi, "xi");
    const dx = numberAt(row, iDx, "dx_over_x0_analytic");
    let curve = byRatio.get(r);
    if (!curve) {
      curve = { r, xi: [], dx: [], mc: [] };
      byRatio.set(r, curve);
    }
    curve.xi.push(xi);
    curve.dx.push(dx);
    const mc = row[iMc];
    if (typeof mc === "number") {
      const se = row[iSe];
      curve.mc.push({
        xi,
        value: mc,
        stderr: typeof se === "number" ? se : 0,
      });
    }
  }
  if (byRatio.size === 0) {
    throw new CsvContractError("fig2 CSV has no data rows");
  }
  return [...byRatio.values()].sort((a, b) => a.r - b.r);
}

export function renderFig2(
  csvText: string,
  minima: MinimaEntry[] | MinimaFile | null,
  options: Fig2Options = {},
): string {
  const table = parseCsv(csvText);
  const curves = collectCurves(table);

  let entries: MinimaEntry[] | null = null;
  if (minima !== null) {
    if (Array.isArray(minima)) {
      entries = minima;
    } else {
      entries = minima.entries;
      const csvDigest = table.metadata["config_digest"];
      if (csvDigest && minima.configDigest && csvDigest !== minima.configDigest) {
        throw new CsvContractError(
          `config digest mismatch: fig2 CSV carries ${csvDigest} but the ` +
            `minima sidecar carries ${minima.configDigest}`,
        );
      }
    }
  }

  const width = options.width ?? 640;
  const height = options.height ?? 440;
  const box = { left: 64, top: 24, width: width - 96, height: height - 88 };

  const xiMax = Math.max(...curves.flatMap((c) => c.xi));
  const allY = [
    ...curves.flatMap((c) => c.dx),
    ...curves.flatMap((c) => c.mc.map((p) => p.value)),
  ];
  const yMax = Math.max(...allY);
  const yDomain: [number, number] = options.logY
    ? [Math.min(...allY.filter((v) => v > 0)) / 1.2, 1.05 * yMax]
    : [0, 1.05 * yMax];
  const doc = new SvgDoc(width, height);
  const frame = drawFrame(
    doc,
    box,
    [0, xiMax],
    yDomain,
    options.xLabel ?? "squeeze parameter xi",
    options.yLabel ?? "dx / x0",
    { logY: options.logY ?? false },
  );

  curves.forEach((curve, k) => {
    const color = PALETTE[k % PALETTE.length];
    const label = String.fromCharCode(97 + k); // a, b, c, ...
    doc.polyline(
      curve.xi.map((v, i) => [frame.x(v), frame.y(curve.dx[i])]),
      color,
    );
    // label the curve near its right end
    const end = curve.xi.length - 1;
    doc.text(
      frame.x(curve.xi[end]) + 4,
      frame.y(curve.dx[end]),
      `(${label}) r=${fmt(curve.r)}`,
      { fill: color, size: 10 },
    );
    for (const p of curve.mc) {
      const px = frame.x(p.xi);
      doc.line(px, frame.y(p.value - 3 * p.stderr), px, frame.y(p.value + 3 * p.stderr), color, 1);
      doc.circle(px, frame.y(p.value), 2.5, color);
    }
  });

  if (entries) {
    for (const entry of entries) {
      if (entry.boundary || entry.xi_star === null || entry.dx_over_x0_min === null) {
        continue;
      }
      const k = curves.findIndex((c) => c.r === entry.r);
      const color = k >= 0 ? PALETTE[k % PALETTE.length] : "#222";
      const px = frame.x(entry.xi_star);
      const py = frame.y(entry.dx_over_x0_min);
      doc.circle(px, py, 3.5, color);
      doc.text(px + 5, py + 12, `min ${fmt(entry.dx_over_x0_min)} @ xi*=${fmt(entry.xi_star)}`, {
        size: 9,
        fill: color,
      });
    }
  }
  return doc.render();
}

export function parseMinima(jsonText: string): MinimaFile {
  const doc = JSON.parse(jsonText);
  if (!Array.isArray(doc.minima)) {
    throw new CsvContractError("minima sidecar lacks a 'minima' array");
  }
  return {
    entries: doc.minima as MinimaEntry[],
    configDigest: doc.metadata?.config_digest ?? null,
  };
}
