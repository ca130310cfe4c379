import { SnapshotNode, snapshotGrids } from "./csv";
import { SvgDoc, drawAxes, linearScale, seriesColor } from "./svg";

export interface ChordOptions {
  y?: number;
  xMin?: number;
  xMax?: number;
  samples?: number;
  width?: number;
  panelHeight?: number;
}

function inverseBilinear(c: number[][], px: number, py: number):
  [number, number] | null {
  // Newton on the bilinear map of one quad; c = [p00, p10, p11, p01]
  let s = 0.5;
  let t = 0.5;
  for (let it = 0; it < 20; it++) {
    const x = (1 - s) * (1 - t) * c[0][0] + s * (1 - t) * c[1][0]
      + s * t * c[2][0] + (1 - s) * t * c[3][0];
    const y = (1 - s) * (1 - t) * c[0][1] + s * (1 - t) * c[1][1]
      + s * t * c[2][1] + (1 - s) * t * c[3][1];
    const rx = x - px;
    const ry = y - py;
    if (Math.hypot(rx, ry) < 1e-12) break;
    const dxs = -(1 - t) * c[0][0] + (1 - t) * c[1][0] + t * c[2][0] - t * c[3][0];
    const dxt = -(1 - s) * c[0][0] - s * c[1][0] + s * c[2][0] + (1 - s) * c[3][0];
    const dys = -(1 - t) * c[0][1] + (1 - t) * c[1][1] + t * c[2][1] - t * c[3][1];
    const dyt = -(1 - s) * c[0][1] - s * c[1][1] + s * c[2][1] + (1 - s) * c[3][1];
    const det = dxs * dyt - dxt * dys;
    if (Math.abs(det) < 1e-30) return null;
    s -= (dyt * rx - dxt * ry) / det;
    t -= (-dys * rx + dxs * ry) / det;
  }
  if (s < -1e-6 || s > 1 + 1e-6 || t < -1e-6 || t > 1 + 1e-6) return null;
  return [Math.min(Math.max(s, 0), 1), Math.min(Math.max(t, 0), 1)];
}

/** Bilinear sample of a snapshot at one physical point; NaN when outside. */
export function sampleSnapshot(nodes: SnapshotNode[], px: number, py: number): number {
  for (const grid of snapshotGrids(nodes).values()) {
    for (let i = 0; i + 1 < grid.length; i++) {
      for (let j = 0; j + 1 < (grid[i]?.length ?? 0); j++) {
        const q = [grid[i][j], grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]];
        if (q.some((a) => a === undefined)) continue;
        const xs = q.map((a) => a.x);
        const ys = q.map((a) => a.y);
        if (px < Math.min(...xs) - 1e-9 || px > Math.max(...xs) + 1e-9
          || py < Math.min(...ys) - 1e-9 || py > Math.max(...ys) + 1e-9) continue;
        const st = inverseBilinear(q.map((a) => [a.x, a.y]), px, py);
        if (st === null) continue;
        const [s, t] = st;
        return (1 - s) * (1 - t) * q[0].u + s * (1 - t) * q[1].u
          + s * t * q[2].u + (1 - s) * t * q[3].u;
      }
    }
  }
  return NaN;
}

/**
 * Solution along the chord y = const, one curve per labelled snapshot and
 * one panel per panel group (the harness uses kappa_par panels stacked
 * top/bottom).
 */
export function plotChord(panels: { title: string;
  snapshots: { label: string; nodes: SnapshotNode[] }[] }[],
  opts: ChordOptions = {}): string {
  const y = opts.y ?? 0.0;
  const xMin = opts.xMin ?? -0.9;
  const xMax = opts.xMax ?? -0.5;
  const m = opts.samples ?? 61;
  const width = opts.width ?? 640;
  const panelH = opts.panelHeight ?? 260;
  const doc = new SvgDoc(width, panelH * panels.length);
  const margin = { l: 70, r: 20, t: 28, b: 40 };

  panels.forEach((panel, pi) => {
    const yoff = pi * panelH;
    const curves = panel.snapshots.map((snap) => {
      const pts: [number, number][] = [];
      for (let k = 0; k < m; k++) {
        const px = xMin + (k * (xMax - xMin)) / (m - 1);
        const v = sampleSnapshot(snap.nodes, px, y);
        if (Number.isFinite(v)) pts.push([px, v]);
      }
      if (pts.length === 0) {
        throw new Error(`chord misses the domain for series '${snap.label}'`);
      }
      return { label: snap.label, pts };
    });
    const allv = curves.flatMap((c) => c.pts.map((p) => p[1]));
    const lo = Math.min(...allv);
    const hi = Math.max(...allv);
    const pad = (hi - lo || 1) * 0.1;
    const xs = linearScale([xMin, xMax], [margin.l, width - margin.r]);
    const ysc = linearScale([lo - pad, hi + pad],
      [yoff + panelH - margin.b, yoff + margin.t]);
    drawAxes(doc, xs, ysc, "x (chord at y = 0)", "u");
    doc.text(width / 2, yoff + 16, panel.title,
      'text-anchor="middle" font-size="12"');
    curves.forEach((c, k) => {
      const color = seriesColor(k);
      doc.add(`<polyline fill="none" stroke="${color}" stroke-width="1.5" ` +
        `points="${c.pts.map(([a, b]) => `${xs(a)},${ysc(b)}`).join(" ")}"/>`);
      doc.text(width - margin.r - 4, yoff + margin.t + 12 * (k + 1), c.label,
        `text-anchor="end" font-size="10" fill="${color}"`);
    });
  });
  return doc.render();
}
