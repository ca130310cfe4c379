import { readFileSync } from "fs";
import Papa from "papaparse";

export interface ConvergenceRow {
  order: number;
  gamma: number;
  kappa_par: number | null;
  n: number;
  error: number;
  rate: number | null;
}

export interface SnapshotNode {
  block: number;
  i: number;
  j: number;
  x: number;
  y: number;
  u: number;
}

export interface PoincarePoint {
  seed: number;
  transit: number;
  x: number;
  y: number;
}

function parseFile(path: string): Record<string, string>[] {
  const text = readFileSync(path, "utf8");
  const res = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (res.errors.length > 0) {
    throw new Error(`${path}: ${res.errors[0].message} (row ${res.errors[0].row})`);
  }
  return res.data;
}

export function readConvergence(path: string): ConvergenceRow[] {
  return parseFile(path).map((r) => ({
    order: Number(r.order),
    gamma: Number(r.gamma),
    kappa_par: r.kappa_par === "" || r.kappa_par === undefined ? null : Number(r.kappa_par),
    n: Number(r.n),
    error: Number(r.error),
    rate: r.rate === "" || r.rate === undefined ? null : Number(r.rate),
  }));
}

export function readSnapshot(path: string): SnapshotNode[] {
  return parseFile(path).map((r) => ({
    block: Number(r.block),
    i: Number(r.i),
    j: Number(r.j),
    x: Number(r.x),
    y: Number(r.y),
    u: Number(r.u),
  }));
}

export function readPoincare(path: string): PoincarePoint[] {
  return parseFile(path).map((r) => ({
    seed: Number(r.seed),
    transit: Number(r.transit),
    x: Number(r.x),
    y: Number(r.y),
  }));
}

/** Group snapshot rows into per-block (nq x nr) grids keyed by block id. */
export function snapshotGrids(nodes: SnapshotNode[]): Map<number, SnapshotNode[][]> {
  const blocks = new Map<number, SnapshotNode[][]>();
  for (const node of nodes) {
    if (!blocks.has(node.block)) blocks.set(node.block, []);
    const grid = blocks.get(node.block)!;
    if (!grid[node.i]) grid[node.i] = [];
    grid[node.i][node.j] = node;
  }
  return blocks;
}
