import { describe, expect, it } from "vitest";
import { join } from "path";
import { plotHeatmap } from "../src/heatmap";
import { plotChord, sampleSnapshot } from "../src/chord";
import { plotPoincare } from "../src/poincare";
import { readPoincare, readSnapshot } from "../src/csv";

const FIX = join(__dirname, "..", "fixtures");

describe("heatmap", () => {
  it("renders the island snapshot with a Poincare overlay", () => {
    const nodes = readSnapshot(join(FIX, "snapshot_k1e6.csv"));
    const pts = readPoincare(join(FIX, "poincare.csv"));
    const svg = plotHeatmap(nodes, { poincare: pts });
    expect(svg).toContain("<polygon");
    expect(svg).toContain("<circle");
  });

  it("error panel of a snapshot against itself is flat zero", () => {
    const nodes = readSnapshot(join(FIX, "snapshot_k1e6.csv"));
    const svg = plotHeatmap(nodes, { reference: nodes });
    // both panels render; error values are all zero -> a single color
    const panel2 = svg.split("pointwise relative error")[0];
    expect(panel2.length).toBeGreaterThan(0);
    expect(svg).toContain("pointwise relative error");
  });

  it("constant snapshot renders flat", () => {
    const nodes = readSnapshot(join(FIX, "snapshot_k1e6.csv"))
      .map((n) => ({ ...n, u: 1.0 }));
    const svg = plotHeatmap(nodes);
    expect(svg).toContain("<polygon");
  });
});

describe("chord", () => {
  it("renders curves for both kappa panels from harness snapshots", () => {
    const a = readSnapshot(join(FIX, "snapshot_k1e6.csv"));
    const b = readSnapshot(join(FIX, "snapshot_k1e9.csv"));
    const svg = plotChord([
      { title: "kappa_par = 1e6", snapshots: [{ label: "n=21", nodes: a }] },
      { title: "kappa_par = 1e9", snapshots: [{ label: "n=21", nodes: b }] },
    ]);
    expect((svg.match(/<polyline/g) ?? []).length).toBe(2);
  });

  it("bilinear sampling hits node values at the nodes", () => {
    const nodes = readSnapshot(join(FIX, "snapshot_k1e6.csv"));
    const probe = nodes[nodes.length >> 1];
    const v = sampleSnapshot(nodes, probe.x, probe.y);
    expect(v).toBeCloseTo(probe.u, 8);
  });

  it("raises for a chord outside the domain", () => {
    const nodes = readSnapshot(join(FIX, "snapshot_k1e6.csv"));
    expect(() => plotChord(
      [{ title: "bad", snapshots: [{ label: "x", nodes }] }],
      { y: 5.0 })).toThrow(/misses the domain/);
  });
});

describe("poincare", () => {
  it("renders the harness section", () => {
    const pts = readPoincare(join(FIX, "poincare.csv"));
    const svg = plotPoincare(pts);
    expect((svg.match(/<circle/g) ?? []).length).toBeGreaterThan(100);
  });
});
