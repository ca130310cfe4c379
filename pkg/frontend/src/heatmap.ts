import { PoincarePoint, SnapshotNode, snapshotGrids } from "./csv";
import { SvgDoc, colorRamp, linearScale } from "./svg";

export interface HeatmapOptions {
  width?: number;
  panelHeight?: number;
  cutoff?: number | null;      // clip solution colors above this value
  poincare?: PoincarePoint[];  // overlay on the solution panel
  reference?: SnapshotNode[];  // same-grid reference for the error panel
}

function cellPolys(nodes: SnapshotNode[],
  value: (a: SnapshotNode) => number): { poly: number[][]; v: number }[] {
  const out: { poly: number[][]; v: number }[] = [];
  for (const grid of snapshotGrids(nodes).values()) {
    for (let i = 0; i + 1 < grid.length; i++) {
      for (let j = 0; j + 1 < (grid[i]?.length ?? 0); j++) {
        const c = [grid[i][j], grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]];
        if (c.some((q) => q === undefined)) continue;
        out.push({
          poly: c.map((q) => [q.x, q.y]),
          v: c.reduce((s, q) => s + value(q), 0) / 4,
        });
      }
    }
  }
  return out;
}

function drawPanel(doc: SvgDoc, cells: { poly: number[][]; v: number }[],
  lo: number, hi: number, yoff: number, panelH: number, width: number,
  title: string, upperHalfOnly: boolean): (x: number, y: number) => [number, number] {
  const margin = 40;
  const xscale = linearScale([-1.05, 1.05], [margin, width - margin]);
  const ymin = upperHalfOnly ? -0.02 : -1.05;
  const yspan = 1.05 - ymin;
  const pxPerUnit = (width - 2 * margin) / 2.1;
  const yscale = (y: number) => yoff + panelH - 8 - (y - ymin) * (panelH - 30) / yspan;
  const toPix = (x: number, y: number): [number, number] => [xscale(x), yscale(y)];

  for (const cell of cells) {
    if (upperHalfOnly && cell.poly.every(([, y]) => y < -1e-12)) continue;
    const t = hi > lo ? (Math.min(cell.v, hi) - lo) / (hi - lo) : 0.0;
    const pts = cell.poly.map(([x, y]) => toPix(x, y).join(",")).join(" ");
    doc.add(`<polygon points="${pts}" fill="${colorRamp(t)}" stroke="none"/>`);
  }
  doc.text(width / 2, yoff + 16, title, 'text-anchor="middle" font-size="12"');
  void pxPerUnit;
  return toPix;
}

/**
 * Upper-half-plane solution heatmap with optional Poincare overlay, plus a
 * pointwise relative-error panel when a same-grid reference is supplied.
 */
export function plotHeatmap(nodes: SnapshotNode[],
  opts: HeatmapOptions = {}): string {
  if (nodes.length === 0) throw new Error("empty snapshot");
  const width = opts.width ?? 640;
  const panelH = opts.panelHeight ?? 330;
  const panels = opts.reference ? 2 : 1;
  const doc = new SvgDoc(width, panelH * panels);

  let vals = nodes.map((n) => n.u);
  let hi = Math.max(...vals);
  const lo = Math.min(...vals);
  if (opts.cutoff !== undefined && opts.cutoff !== null) hi = opts.cutoff;
  const cells = cellPolys(nodes, (n) => n.u);
  const toPix = drawPanel(doc, cells, lo, hi, 0, panelH, width,
    "solution (upper half plane)", true);

  if (opts.poincare) {
    for (const p of opts.poincare) {
      if (p.y < -1e-12) continue;
      const [cx, cy] = toPix(p.x, p.y);
      doc.add(`<circle cx="${cx}" cy="${cy}" r="0.7" fill="black" fill-opacity="0.6"/>`);
    }
  }

  if (opts.reference) {
    const ref = new Map(opts.reference.map(
      (n) => [`${n.block}:${n.i}:${n.j}`, n.u]));
    const scale = Math.max(...opts.reference.map((n) => Math.abs(n.u)), 1e-300);
    const errNodes = nodes.map((n) => {
      const r = ref.get(`${n.block}:${n.i}:${n.j}`);
      if (r === undefined) throw new Error("reference grid does not match snapshot");
      return { ...n, u: Math.abs(n.u - r) / scale };
    });
    const evals = errNodes.map((n) => n.u);
    drawPanel(doc, cellPolys(errNodes, (n) => n.u), 0, Math.max(...evals),
      panelH, panelH, width, "pointwise relative error", false);
  }
  return doc.render();
}
