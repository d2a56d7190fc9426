/**
 * Minimal deterministic SVG scene builder: linear scales, nice ticks, axes,
 * polylines, markers and text. No DOM, no timestamps; identical input
 * produces identical bytes.
 */

export interface Scale {
  (v: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const f = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  if (!(d0 > 0 && d1 > 0)) {
    throw new Error("log scale needs a positive domain");
  }
  const l0 = Math.log10(d0);
  const span = Math.log10(d1) - l0 || 1;
  const [r0, r1] = range;
  const f = ((v: number) =>
    r0 + ((Math.log10(Math.max(v, d0)) - l0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

/** Decade ticks inside a positive domain. */
export function logTicks(domain: [number, number]): number[] {
  const [lo, hi] = domain;
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo)); Math.pow(10, e) <= hi * (1 + 1e-12); e++) {
    ticks.push(Math.pow(10, e));
  }
  return ticks.length > 0 ? ticks : [lo, hi];
}

/** Round ticks covering the domain, at most `count + 1` of them. */
export function niceTicks(domain: [number, number], count = 6): number[] {
  const [lo, hi] = domain;
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = mag;
  for (const m of [1, 2, 2.5, 5, 10]) {
    if (m * mag >= rawStep) {
      step = m * mag;
      break;
    }
  }
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-12 * step; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : Number(v.toPrecision(12)));
  }
  return ticks;
}

export function fmt(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 1e4 || abs < 1e-3) return v.toExponential(1);
  return String(Number(v.toPrecision(6)));
}

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export class SvgDoc {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {}

  raw(fragment: string): void {
    this.parts.push(fragment);
  }

  polyline(points: [number, number][], stroke: string, opts: {
    width?: number;
    dash?: string;
  } = {}): void {
    const pts = points.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(" ");
    const dash = opts.dash ? ` stroke-dasharray="${opts.dash}"` : "";
    this.parts.push(
      `<polyline fill="none" stroke="${stroke}" stroke-width="${opts.width ?? 1.5}"${dash} points="${pts}"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1): void {
    this.parts.push(
      `<line x1="${x1.toFixed(2)}" y1="${y1.toFixed(2)}" x2="${x2.toFixed(2)}" y2="${y2.toFixed(2)}" stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  circle(cx: number, cy: number, r: number, fill: string): void {
    this.parts.push(
      `<circle cx="${cx.toFixed(2)}" cy="${cy.toFixed(2)}" r="${r}" fill="${fill}"/>`,
    );
  }

  text(x: number, y: number, content: string, opts: {
    size?: number;
    anchor?: "start" | "middle" | "end";
    fill?: string;
    rotate?: number;
  } = {}): void {
    const transform = opts.rotate
      ? ` transform="rotate(${opts.rotate} ${x.toFixed(2)} ${y.toFixed(2)})"`
      : "";
    this.parts.push(
      `<text x="${x.toFixed(2)}" y="${y.toFixed(2)}" font-family="Helvetica, Arial, sans-serif" font-size="${opts.size ?? 11}" text-anchor="${opts.anchor ?? "start"}" fill="${opts.fill ?? "#222"}"${transform}>${esc(content)}</text>`,
    );
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">` +
      `<rect width="${this.width}" height="${this.height}" fill="white"/>` +
      this.parts.join("") +
      `</svg>`
    );
  }
}

export interface Frame {
  x: Scale;
  y: Scale;
}

/** Draw axes with ticks and labels for a plot panel; returns the scales. */
export function drawFrame(
  doc: SvgDoc,
  box: { left: number; top: number; width: number; height: number },
  xDomain: [number, number],
  yDomain: [number, number],
  xLabel: string,
  yLabel: string,
  opts: { logY?: boolean } = {},
): Frame {
  const x = linearScale(xDomain, [box.left, box.left + box.width]);
  const y = opts.logY
    ? logScale(yDomain, [box.top + box.height, box.top])
    : linearScale(yDomain, [box.top + box.height, box.top]);
  const bottom = box.top + box.height;
  doc.line(box.left, bottom, box.left + box.width, bottom, "#222");
  doc.line(box.left, box.top, box.left, bottom, "#222");
  for (const t of niceTicks(xDomain)) {
    const px = x(t);
    doc.line(px, bottom, px, bottom + 4, "#222");
    doc.text(px, bottom + 16, fmt(t), { anchor: "middle", size: 10 });
  }
  const yTicks = opts.logY ? logTicks(yDomain) : niceTicks(yDomain);
  for (const t of yTicks) {
    const py = y(t);
    doc.line(box.left - 4, py, box.left, py, "#222");
    doc.text(box.left - 7, py + 3, fmt(t), { anchor: "end", size: 10 });
  }
  doc.text(box.left + box.width / 2, bottom + 32, xLabel, { anchor: "middle" });
  doc.text(box.left - 42, box.top + box.height / 2, yLabel, {
    anchor: "middle",
    rotate: -90,
  });
  return { x, y };
}

/** Color-blind-safe palette (Okabe-Ito). */
export const PALETTE = [
  "#0072B2",
  "#D55E00",
  "#009E73",
  "#CC79A7",
  "#E69F00",
  "#56B4E9",
  "#F0E442",
  "#000000",
];
