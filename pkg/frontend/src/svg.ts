/** Minimal deterministic SVG output: scales, axes, polylines, markers.
 *
 * Rendering is a pure function of the input data; nothing here reads the
 * clock or any environment, so regenerated figures are byte-identical.
 */

export const WIDTH = 720;
export const HEIGHT = 480;
export const MARGIN = { top: 24, right: 170, bottom: 46, left: 64 };

export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

export class LinearScale {
  constructor(
    readonly d0: number, readonly d1: number,
    readonly r0: number, readonly r1: number,
  ) {}

  apply(v: number): number {
    const span = this.d1 - this.d0;
    const f = span === 0 ? 0.5 : (v - this.d0) / span;
    return this.r0 + f * (this.r1 - this.r0);
  }
}

export function extent(values: number[], pad = 0.0): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo)) {
    throw new Error("extent of no values");
  }
  const span = hi - lo || 1;
  return [lo - pad * span, hi + pad * span];
}

export function ticks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = span / count / step;
  const unit = err >= 7.5 ? step * 10 : err >= 3.5 ? step * 5 : err >= 1.5 ? step * 2 : step;
  const out: number[] = [];
  for (let v = Math.ceil(lo / unit) * unit; v <= hi + unit / 1e6; v += unit) {
    out.push(Number(v.toFixed(12)));
  }
  return out;
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function el(tag: string, attrs: Record<string, string | number>, body = ""): string {
  const parts = Object.entries(attrs).map(([k, v]) => `${k}="${v}"`).join(" ");
  return body === "" ? `<${tag} ${parts}/>` : `<${tag} ${parts}>${body}</${tag}>`;
}

export function text(x: number, y: number, content: string,
                     anchor: "start" | "middle" | "end" = "start", size = 12): string {
  return el("text", {
    x: fmt(x), y: fmt(y), "text-anchor": anchor, "font-size": size,
    "font-family": "sans-serif", fill: "#222",
  }, esc(content));
}

export function fmt(v: number): string {
  return Number(v.toFixed(3)).toString();
}

export function polyline(points: Array<[number, number]>, stroke: string,
                         dashed = false, width = 1.5): string {
  const attrs: Record<string, string | number> = {
    points: points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" "),
    fill: "none", stroke, "stroke-width": width,
  };
  if (dashed) {
    attrs["stroke-dasharray"] = "6 4";
  }
  return el("polyline", attrs);
}

export interface AxisLabels {
  x: string;
  y: string;
}

/** Axis lines, ticks and labels; returns the SVG fragment. */
export function axes(sx: LinearScale, sy: LinearScale, labels: AxisLabels): string {
  const pieces: string[] = [];
  const x0 = sx.r0, x1 = sx.r1, y0 = sy.r0, y1 = sy.r1;
  pieces.push(polyline([[x0, y0], [x1, y0]], "#222", false, 1));
  pieces.push(polyline([[x0, y0], [x0, y1]], "#222", false, 1));
  for (const v of ticks(sx.d0, sx.d1)) {
    const x = sx.apply(v);
    pieces.push(polyline([[x, y0], [x, y0 + 5]], "#222", false, 1));
    pieces.push(text(x, y0 + 18, String(v), "middle", 11));
  }
  for (const v of ticks(sy.d0, sy.d1)) {
    const y = sy.apply(v);
    pieces.push(polyline([[x0 - 5, y], [x0, y]], "#222", false, 1));
    pieces.push(text(x0 - 8, y + 4, String(v), "end", 11));
  }
  pieces.push(text((x0 + x1) / 2, HEIGHT - 8, labels.x, "middle"));
  pieces.push(el("g", { transform: `rotate(-90 14 ${(y0 + y1) / 2})` },
                 text(14, (y0 + y1) / 2, labels.y, "middle")));
  return pieces.join("\n");
}

export function legendEntry(x: number, y: number, color: string, label: string,
                            dashed = false): string {
  return [
    polyline([[x, y - 4], [x + 22, y - 4]], color, dashed, 2),
    text(x + 28, y, label, "start", 11),
  ].join("\n");
}

export function document(body: string): string {
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}">\n` +
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>\n${body}\n</svg>\n`;
}
