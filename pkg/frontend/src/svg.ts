import { writeFileSync } from "fs";

export interface Scale {
  (v: number): number;
  invert(px: number): number;
  domain: [number, number];
  range: [number, number];
  log: boolean;
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const f = ((v: number) => r0 + ((v - d0) / (d1 - d0)) * (r1 - r0)) as Scale;
  f.invert = (px: number) => d0 + ((px - r0) / (r1 - r0)) * (d1 - d0);
  f.domain = domain;
  f.range = range;
  f.log = false;
  return f;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const l0 = Math.log10(d0);
  const l1 = Math.log10(d1);
  const f = ((v: number) => r0 + ((Math.log10(v) - l0) / (l1 - l0)) * (r1 - r0)) as Scale;
  f.invert = (px: number) => Math.pow(10, l0 + ((px - r0) / (r1 - r0)) * (l1 - l0));
  f.domain = domain;
  f.range = range;
  f.log = true;
  return f;
}

export function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.floor(Math.log10(lo)); e <= Math.ceil(Math.log10(hi)); e++) {
    const t = Math.pow(10, e);
    if (t >= lo * 0.999 && t <= hi * 1.001) ticks.push(t);
  }
  return ticks;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd",
  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

export function seriesColor(k: number): string {
  return PALETTE[k % PALETTE.length];
}

/** Small piecewise-linear viridis-like ramp for heatmaps. */
export function colorRamp(t: number): string {
  const stops: [number, number, number][] = [
    [68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37],
  ];
  const s = Math.min(Math.max(t, 0), 1) * (stops.length - 1);
  const k = Math.min(Math.floor(s), stops.length - 2);
  const f = s - k;
  const c = stops[k].map((a, idx) => Math.round(a + f * (stops[k + 1][idx] - a)));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

export class SvgDoc {
  parts: string[] = [];
  constructor(public width: number, public height: number) {}

  add(fragment: string): void {
    this.parts.push(fragment);
  }

  text(x: number, y: number, s: string, opts = ""): void {
    this.add(`<text x="${x}" y="${y}" font-family="sans-serif" ${opts}>${s}</text>`);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke = "#000", w = 1): void {
    this.add(`<line x1="${x1}" y1="${y1}" x2="${x2}" y2="${y2}" stroke="${stroke}" stroke-width="${w}"/>`);
  }

  render(): string {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
      `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
      `<rect width="${this.width}" height="${this.height}" fill="white"/>\n` +
      this.parts.join("\n") + "\n</svg>\n";
  }
}

export function drawAxes(doc: SvgDoc, xs: Scale, ys: Scale,
  xlabel: string, ylabel: string): void {
  const [x0, x1] = xs.range;
  const [y0, y1] = ys.range;
  doc.line(x0, y0, x1, y0);
  doc.line(x0, y0, x0, y1);
  doc.text((x0 + x1) / 2, y0 + 32, xlabel, 'text-anchor="middle" font-size="12"');
  doc.text(x0 - 42, (y0 + y1) / 2, ylabel,
    `text-anchor="middle" font-size="12" transform="rotate(-90 ${x0 - 42} ${(y0 + y1) / 2})"`);
  if (xs.log) {
    for (const t of logTicks(Math.min(...xs.domain), Math.max(...xs.domain))) {
      doc.line(xs(t), y0, xs(t), y0 + 4);
      doc.text(xs(t), y0 + 16, `1e${Math.round(Math.log10(t))}`,
        'text-anchor="middle" font-size="9"');
    }
  }
  if (ys.log) {
    for (const t of logTicks(Math.min(...ys.domain), Math.max(...ys.domain))) {
      doc.line(x0 - 4, ys(t), x0, ys(t));
      doc.text(x0 - 6, ys(t) + 3, `1e${Math.round(Math.log10(t))}`,
        'text-anchor="end" font-size="9"');
    }
  }
}

/** Write figure.svg and, when the path ends in .png, a rasterized copy. */
export async function writeFigure(svg: string, outPath: string): Promise<void> {
  if (outPath.endsWith(".png")) {
    const sharp = require("sharp");
    const buf = await sharp(Buffer.from(svg), { density: 144 }).png().toBuffer();
    writeFileSync(outPath, buf);
    writeFileSync(outPath.replace(/\.png$/, ".svg"), svg);
  } else {
    writeFileSync(outPath, svg);
  }
}
