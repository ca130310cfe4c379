import { ConvergenceRow } from "./csv";
import { SvgDoc, Scale, drawAxes, logScale, seriesColor } from "./svg";

export interface ConvergenceOptions {
  width?: number;
  height?: number;
  triangles?: number[]; // reference slopes, default [2, 4]
}

interface Series {
  key: string;
  points: { n: number; error: number }[];
}

function groupSeries(rows: ConvergenceRow[]): Series[] {
  const map = new Map<string, Series>();
  for (const r of rows) {
    const key = `order ${r.order}, gamma ${r.gamma}` +
      (r.kappa_par !== null ? `, kpar ${r.kappa_par.toExponential(0)}` : "");
    if (!map.has(key)) map.set(key, { key, points: [] });
    map.get(key)!.points.push({ n: r.n, error: r.error });
  }
  for (const s of map.values()) s.points.sort((a, b) => a.n - b.n);
  return [...map.values()];
}

/**
 * Log-log convergence figure: one polyline per (order, gamma, kappa_par)
 * series plus dashed reference-slope triangles.  Triangle vertices are laid
 * out in data space (error proportional to (n-1)^-slope) and carry their
 * data coordinates as attributes so the rendered slope can be audited.
 */
export function plotConvergence(rows: ConvergenceRow[],
  opts: ConvergenceOptions = {}): string {
  if (rows.length === 0) throw new Error("empty convergence table");
  const series = groupSeries(rows);
  for (const s of series) {
    if (s.points.length < 2) {
      throw new Error(`series '${s.key}' has fewer than two resolutions`);
    }
  }
  const width = opts.width ?? 640;
  const height = opts.height ?? 480;
  const slopes = opts.triangles ?? [2, 4];
  const margin = { l: 70, r: 20, t: 30, b: 50 };

  const ns = rows.map((r) => r.n - 1);
  const errs = rows.map((r) => r.error);
  const xs = logScale(
    [Math.min(...ns) / 1.2, Math.max(...ns) * 1.2],
    [margin.l, width - margin.r]);
  const ys = logScale(
    [Math.min(...errs) / 3, Math.max(...errs) * 3],
    [height - margin.b, margin.t]);

  const doc = new SvgDoc(width, height);
  doc.add(`<metadata id="scales" data-xd0="${xs.domain[0]}" data-xd1="${xs.domain[1]}" ` +
    `data-xr0="${xs.range[0]}" data-xr1="${xs.range[1]}" ` +
    `data-yd0="${ys.domain[0]}" data-yd1="${ys.domain[1]}" ` +
    `data-yr0="${ys.range[0]}" data-yr1="${ys.range[1]}"/>`);
  drawAxes(doc, xs, ys, "nodes per block edge - 1", "relative error");

  series.forEach((s, k) => {
    const color = seriesColor(k);
    const pts = s.points.map((p) => `${xs(p.n - 1)},${ys(p.error)}`).join(" ");
    doc.add(`<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.5"/>`);
    for (const p of s.points) {
      doc.add(`<circle cx="${xs(p.n - 1)}" cy="${ys(p.error)}" r="3" fill="${color}"/>`);
    }
    doc.text(width - margin.r - 4, margin.t + 14 * (k + 1), s.key,
      `text-anchor="end" font-size="10" fill="${color}"`);
  });

  // reference triangles hang below the first series
  const anchor = series[0].points;
  slopes.forEach((slope, si) => {
    const p0 = anchor[Math.min(si, anchor.length - 2)];
    const p1 = anchor[Math.min(si + 1, anchor.length - 1)];
    const m0 = p0.n - 1;
    const m1 = p1.n - 1;
    const e0 = p0.error / 2.5;
    const e1 = e0 * Math.pow(m0 / m1, slope);
    const v = [[xs(m0), ys(e0)], [xs(m1), ys(e1)], [xs(m0), ys(e1)]];
    doc.add(`<polygon class="slope-triangle" data-slope="${slope}" ` +
      `data-m0="${m0}" data-m1="${m1}" data-e0="${e0}" data-e1="${e1}" ` +
      `points="${v.map((q) => q.join(",")).join(" ")}" ` +
      `fill="none" stroke="#555" stroke-dasharray="4 3"/>`);
    doc.text(xs(m0) - 4, (ys(e0) + ys(e1)) / 2, String(slope),
      'text-anchor="end" font-size="10" fill="#555"');
  });
  return doc.render();
}

/**
 * Recover each triangle's slope purely from the rendered geometry: parse the
 * polygon's pixel vertices and invert them through the axis scales embedded
 * in the figure metadata.
 */
export function measureTriangleSlopes(svg: string): number[] {
  const meta = svg.match(/<metadata id="scales"([^/]*)\/>/);
  if (!meta) throw new Error("figure carries no scale metadata");
  const attr = (frag: string, name: string): number => {
    const m = frag.match(new RegExp(`data-${name}="([^"]+)"`));
    if (!m) throw new Error(`missing data-${name}`);
    return Number(m[1]);
  };
  const xs = logScale(
    [attr(meta[1], "xd0"), attr(meta[1], "xd1")],
    [attr(meta[1], "xr0"), attr(meta[1], "xr1")]);
  const ys = logScale(
    [attr(meta[1], "yd0"), attr(meta[1], "yd1")],
    [attr(meta[1], "yr0"), attr(meta[1], "yr1")]);

  const triangles = svg.match(/<polygon class="slope-triangle"[^/]*\/>/g) ?? [];
  return triangles.map((frag) => {
    const pm = frag.match(/points="([^"]+)"/);
    if (!pm) throw new Error("triangle has no points");
    const verts = pm[1].split(" ").map((p) => p.split(",").map(Number));
    // vertex order: (m0, e0), (m1, e1), (m0, e1)
    const m0 = xs.invert(verts[0][0]);
    const e0 = ys.invert(verts[0][1]);
    const m1 = xs.invert(verts[1][0]);
    const e1 = ys.invert(verts[1][1]);
    return Math.log(e0 / e1) / Math.log(m1 / m0);
  });
}
