import { PoincarePoint } from "./csv";
import { SvgDoc, linearScale, seriesColor } from "./svg";

/** Scatter of transit landing points, colored per seed. */
export function plotPoincare(points: PoincarePoint[], width = 560): string {
  if (points.length === 0) throw new Error("empty Poincare point set");
  const doc = new SvgDoc(width, width);
  const margin = 30;
  const xs = linearScale([-1.05, 1.05], [margin, width - margin]);
  const ys = linearScale([-1.05, 1.05], [width - margin, margin]);
  // unit circle for orientation
  const r = Math.abs(xs(1) - xs(0));
  doc.add(`<circle cx="${xs(0)}" cy="${ys(0)}" r="${r}" fill="none" stroke="#999"/>`);
  for (const p of points) {
    doc.add(`<circle cx="${xs(p.x)}" cy="${ys(p.y)}" r="1" ` +
      `fill="${seriesColor(p.seed)}"/>`);
  }
  return doc.render();
}
