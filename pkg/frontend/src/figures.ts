/** The three figure kinds rendered from the published CSV schemas.
 *
 * scatter: one dot per projected point, plus the class boundary (red) and
 * the two query boundaries (black solid / black dotted) taken verbatim
 * from the sidecar - no geometry is derived here.
 * tau_curves: exclusion rate against tau, one line per dimension.
 * dim_curves: exclusion rate against dimension, one line per
 * (mechanism, pivot count).
 */
import { SchemaError, parseCsv, toNumber } from "./csv.js";
import {
  HEIGHT, MARGIN, PALETTE, WIDTH,
  LinearScale, axes, document as svgDocument, el, extent, fmt,
  legendEntry, polyline, text,
} from "./svg.js";

export const PROJECTION_HEADER = ["id", "x", "y"] as const;
export const REPORT_HEADER = [
  "dim", "mechanism", "tau", "n_pivots",
  "mean_exclusion_rate", "mean_distance_calls", "seed",
] as const;

export interface Boundary {
  name: string;
  style: string;
  points: Array<[number, number]>;
}

export interface Sidecar {
  kind: string;
  k: number;
  tau: number | null;
  t: number;
  boundaries: Boundary[];
}

export function parseSidecar(jsonText: string): Sidecar {
  let raw: unknown;
  try {
    raw = JSON.parse(jsonText);
  } catch {
    throw new SchemaError("sidecar is not valid JSON");
  }
  const obj = raw as Record<string, unknown>;
  if (typeof obj !== "object" || obj === null || !Array.isArray(obj.boundaries)) {
    throw new SchemaError("sidecar must carry a boundaries array");
  }
  const boundaries = (obj.boundaries as Array<Record<string, unknown>>).map((b) => {
    if (typeof b.name !== "string" || typeof b.style !== "string" || !Array.isArray(b.points)) {
      throw new SchemaError("each boundary needs name, style and points");
    }
    return {
      name: b.name,
      style: b.style,
      points: (b.points as Array<[number, number]>).map((p) => [Number(p[0]), Number(p[1])] as [number, number]),
    };
  });
  return {
    kind: String(obj.kind ?? ""),
    k: Number(obj.k ?? NaN),
    tau: obj.tau === null || obj.tau === undefined ? null : Number(obj.tau),
    t: Number(obj.t ?? NaN),
    boundaries,
  };
}

const BOUNDARY_STROKES: Record<string, { color: string; dashed: boolean }> = {
  red_solid: { color: "#d62728", dashed: false },
  black_solid: { color: "#000000", dashed: false },
  black_dotted: { color: "#000000", dashed: true },
};

export function renderScatter(csvText: string, sidecar?: Sidecar): string {
  const table = parseCsv(csvText, PROJECTION_HEADER);
  const xs = table.rows.map((r) => toNumber(r[1], "x"));
  const ys = table.rows.map((r) => toNumber(r[2], "y"));
  const overlayXs = sidecar ? sidecar.boundaries.flatMap((b) => b.points.map((p) => p[0])) : [];
  const [xLo, xHi] = extent(xs.concat(overlayXs.filter(Number.isFinite)), 0.04);
  const [yLo, yHi] = extent(ys.concat([0]), 0.04);
  const sx = new LinearScale(xLo, xHi, MARGIN.left, WIDTH - MARGIN.right);
  const sy = new LinearScale(yLo, yHi, HEIGHT - MARGIN.bottom, MARGIN.top);

  const pieces: string[] = [axes(sx, sy, { x: "distance-plane x", y: "distance-plane y" })];
  const dots = table.rows.map((_, i) =>
    el("circle", { cx: fmt(sx.apply(xs[i])), cy: fmt(sy.apply(ys[i])), r: 2,
                   fill: "#6b7f93", "fill-opacity": 0.55 })).join("\n");
  pieces.push(el("g", { class: "points" }, dots));

  if (sidecar) {
    let ly = MARGIN.top + 10;
    const lx = WIDTH - MARGIN.right + 14;
    for (const boundary of sidecar.boundaries) {
      const stroke = BOUNDARY_STROKES[boundary.style];
      if (!stroke) {
        throw new SchemaError(`unknown boundary style "${boundary.style}"`);
      }
      if (boundary.points.length < 2) {
        continue;  // an empty locus (e.g. radius below zero) draws nothing
      }
      const pts = boundary.points.map(
        ([x, y]) => [sx.apply(x), sy.apply(y)] as [number, number]);
      pieces.push(polyline(pts, stroke.color, stroke.dashed, 1.8));
      pieces.push(legendEntry(lx, ly, stroke.color, boundary.name, stroke.dashed));
      ly += 18;
    }
    const title = sidecar.tau === null
      ? `${sidecar.kind}  t=${sidecar.t}`
      : `${sidecar.kind}  tau=${sidecar.tau}  t=${sidecar.t}`;
    pieces.push(text(lx, ly + 4, title, "start", 11));
  }
  return svgDocument(pieces.join("\n"));
}

interface Series {
  label: string;
  points: Array<[number, number]>;
}

function renderCurves(series: Series[], xLabel: string): string {
  const allX = series.flatMap((s) => s.points.map((p) => p[0]));
  const [xLo, xHi] = extent(allX, 0.03);
  const sx = new LinearScale(xLo, xHi, MARGIN.left, WIDTH - MARGIN.right);
  const sy = new LinearScale(0, 1, HEIGHT - MARGIN.bottom, MARGIN.top);
  const pieces: string[] = [axes(sx, sy, { x: xLabel, y: "mean exclusion rate" })];
  series.forEach((s, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const pts = s.points.map(([x, y]) => [sx.apply(x), sy.apply(y)] as [number, number]);
    pieces.push(polyline(pts, color));
    for (const [px, py] of pts) {
      pieces.push(el("circle", { cx: fmt(px), cy: fmt(py), r: 2.5, fill: color }));
    }
    pieces.push(legendEntry(WIDTH - MARGIN.right + 14, MARGIN.top + 10 + 18 * idx,
                            color, s.label));
  });
  return svgDocument(pieces.join("\n"));
}

function bySortedKey<T>(map: Map<string, T>): Array<[string, T]> {
  return [...map.entries()].sort((a, b) => a[0].localeCompare(b[0], "en", { numeric: true }));
}

export function renderTauCurves(csvText: string): string {
  const table = parseCsv(csvText, REPORT_HEADER);
  const perDim = new Map<string, Array<[number, number]>>();
  for (const row of table.rows) {
    if (row[1] !== "ptolemaic" || row[2] === "") {
      continue;
    }
    const dim = String(toNumber(row[0], "dim"));
    const entry = perDim.get(dim) ?? [];
    entry.push([toNumber(row[2], "tau"), toNumber(row[4], "mean_exclusion_rate")]);
    perDim.set(dim, entry);
  }
  if (perDim.size === 0) {
    throw new SchemaError("tau_curves needs rows with mechanism=ptolemaic and a tau value");
  }
  const series = bySortedKey(perDim).map(([dim, points]) => ({
    label: `${dim} dimensions`,
    points: points.sort((a, b) => a[0] - b[0]),
  }));
  return renderCurves(series, "tau");
}

export function renderDimCurves(csvText: string): string {
  const table = parseCsv(csvText, REPORT_HEADER);
  const perMech = new Map<string, Array<[number, number]>>();
  const pivotCounts = new Set(table.rows.map((r) => r[3]));
  for (const row of table.rows) {
    const label = pivotCounts.size > 1 ? `${row[1]} (${row[3]} pivots)` : row[1];
    const entry = perMech.get(label) ?? [];
    entry.push([toNumber(row[0], "dim"), toNumber(row[4], "mean_exclusion_rate")]);
    perMech.set(label, entry);
  }
  const series = bySortedKey(perMech).map(([label, points]) => ({
    label,
    points: points.sort((a, b) => a[0] - b[0]),
  }));
  return renderCurves(series, "dimension");
}
