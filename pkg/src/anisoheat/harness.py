"""Experiment harness: manufactured-solution and island convergence studies.

Reproduces the verification experiments at desk scale: MMS convergence of the
pure perpendicular operator on the five-block circle, self-convergence of the
full anisotropic problem against a fine reference with a single magnetic
island, eigenvalue stability audits across a configuration matrix, and
field-line map dumps.  Every experiment is deterministic: the same config
produces byte-identical CSVs.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import fields as field_defs
from .mesh import (MultiBlockDomain, PackingParams, build_circle_five_block,
                   build_from_mapping, build_square_annulus_pair,
                   build_two_block_cartesian, assemble_diffusion_field,
                   dump_mesh_csv)
from .parallel import (ParallelConfig, hermite_eval_logical, dump_map_csv,
                       trace_field_lines)
from .perp import (PerpOperator, audit_lemma_matrices, check_energy_stability,
                   compute_penalties)
from .sbp import build_sbp_set
from .solver import SolveConfig, dump_diagnostics_csv, dump_snapshot_csv, run

__all__ = ["MmsParams", "ExperimentConfig", "mms_manufactured",
           "relative_error", "convergence_rates", "run_mms_experiment",
           "run_island_self_convergence", "run_stability_audit", "run_trace"]


@dataclass(frozen=True)
class MmsParams:
    """Spatial/temporal frequencies of the manufactured solution."""

    omega_x: float = 5.5
    omega_y: float = 7.0
    omega_t: float = 3.0

    def __post_init__(self):
        if min(self.omega_x, self.omega_y, self.omega_t) <= 0:
            raise ValueError("frequencies must be positive")


def mms_manufactured(x, y, t, p: MmsParams = MmsParams(), kperp: float = 1.0):
    """Manufactured solution and matching source for u_t = div(kperp grad u) + F."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sx = np.sin(2 * np.pi * p.omega_x * x)
    sy = np.sin(2 * np.pi * p.omega_y * y)
    u = np.cos(2 * np.pi * p.omega_t * t) * sx * sy
    dudt = -2 * np.pi * p.omega_t * np.sin(2 * np.pi * p.omega_t * t) * sx * sy
    lap = -(2 * np.pi) ** 2 * (p.omega_x**2 + p.omega_y**2) * u
    return u, dudt - kperp * lap


def relative_error(u: np.ndarray, u_star: np.ndarray,
                   h_diag: np.ndarray) -> float:
    """H-weighted relative error |u - u*|_H / |u*|_H."""
    denom = float(np.sqrt(np.sum(h_diag * u_star**2)))
    if denom == 0.0:
        raise ValueError("reference norm is zero")
    return float(np.sqrt(np.sum(h_diag * (u - u_star) ** 2))) / denom


def convergence_rates(errors, resolutions):
    """Observed rates log(e_k/e_{k+1}) / log((n_{k+1}-1)/(n_k-1))."""
    errors = list(errors)
    resolutions = list(resolutions)
    if len(errors) < 2 or len(errors) != len(resolutions):
        raise ValueError("need at least two matched (error, resolution) pairs")
    if any(e <= 0 for e in errors):
        raise ValueError("errors must be positive")
    return [math.log(errors[i] / errors[i + 1])
            / math.log((resolutions[i + 1] - 1) / (resolutions[i] - 1))
            for i in range(len(errors) - 1)]


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "mms"                      # mms | island | stability | trace
    orders: tuple = (2, 4)
    gammas: tuple = (0.0, 0.1)
    n_list: tuple = (21, 31, 41, 51, 61)
    kappa_par: tuple = (1.0e6, 1.0e9)
    kperp: float = 1.0
    reference_n: int = 81
    t_final: float = 0.1
    island_t_final: float = 1.0e-3
    dt_scale_mms: float = 1.0e-3           # dt = dt_scale * (21/n)^2
    dt_scale_island: float = 1.0e-2        # dt = dt_scale / (n-1)^2
    alpha_pack: float = 0.1
    substeps: int = 64
    delta: float = 0.05
    r1: float = 0.7
    out_dir: str = "out"
    cg_rel_tol: float = 1.0e-11

    def __post_init__(self):
        if list(self.n_list) != sorted(self.n_list):
            raise ValueError("resolutions must be ascending")


def _write_convergence_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["order", "gamma", "kappa_par", "n", "error", "rate"])
        for r in rows:
            w.writerow(r)


def _mms_single(n: int, order: int, gamma: float, cfg: ExperimentConfig,
                params: MmsParams):
    dom = build_circle_five_block(n, n, gamma, order=order)
    flds = [assemble_diffusion_field(b, cfg.kperp) for b in dom.blocks]
    op = PerpOperator(dom, flds)
    xs = np.concatenate([b.x.ravel() for b in dom.blocks])
    ys = np.concatenate([b.y.ravel() for b in dom.blocks])

    def forcing(px, py, t):
        return mms_manufactured(px, py, t, params, cfg.kperp)[1]

    def gfun(px, py, t):
        return mms_manufactured(px, py, t, params, cfg.kperp)[0]

    scfg = SolveConfig(dt=cfg.dt_scale_mms * (21.0 / n) ** 2, t_final=cfg.t_final,
                       theta=0.5, kperp=cfg.kperp, forcing=forcing,
                       boundary_data=gfun, cg_rel_tol=cfg.cg_rel_tol)
    state = run(op, scfg, mms_manufactured(xs, ys, 0.0, params, cfg.kperp)[0])
    u_star = mms_manufactured(xs, ys, state.t, params, cfg.kperp)[0]
    return relative_error(state.u, u_star, op.h_diag()), op, state


def run_mms_experiment(cfg: ExperimentConfig, params: MmsParams = MmsParams(),
                       verbose: bool = True):
    """Perpendicular-only convergence on the five-block circle.

    Returns the CSV rows and writes convergence_mms.csv in out_dir.
    """
    os.makedirs(cfg.out_dir, exist_ok=True)
    rows = []
    results = {}
    for order in cfg.orders:
        for gamma in cfg.gammas:
            errs = []
            for n in cfg.n_list:
                err, _, _ = _mms_single(n, order, gamma, cfg, params)
                errs.append(err)
                if verbose:
                    print(f"[mms] order={order} gamma={gamma} n={n} "
                          f"err={err:.4e}", flush=True)
            rates = [""] + [f"{r:.6f}" for r in
                            convergence_rates(errs, cfg.n_list)]
            for n, e, r in zip(cfg.n_list, errs, rates):
                rows.append([order, gamma, "", n, repr(e), r])
            results[(order, gamma)] = errs
    _write_convergence_csv(os.path.join(cfg.out_dir, "convergence_mms.csv"), rows)
    return rows, results


def _island_domain(n: int, order: int, gamma: float, cfg: ExperimentConfig):
    packing = PackingParams(alpha_pack=cfg.alpha_pack, r_s=None)
    return build_circle_five_block(n, n, gamma, packing=packing, order=order)


def _island_run(n: int, order: int, gamma: float, kpar: float,
                cfg: ExperimentConfig):
    dom = _island_domain(n, order, gamma, cfg)
    flds = [assemble_diffusion_field(b, cfg.kperp) for b in dom.blocks]
    op = PerpOperator(dom, flds)
    fld = field_defs.make_field("island", delta=cfg.delta, r1=cfg.r1)
    pcfg = ParallelConfig(kappa_par=kpar, substeps=cfg.substeps)
    flm = trace_field_lines(dom, fld, pcfg)

    def forcing(px, py, _t):
        return field_defs.island_source(px, py)

    scfg = SolveConfig(dt=cfg.dt_scale_island / (n - 1) ** 2,
                       t_final=cfg.island_t_final, theta=0.5,
                       kperp=cfg.kperp, parallel=pcfg, forcing=forcing,
                       boundary_data=None, cg_rel_tol=cfg.cg_rel_tol)
    state = run(op, scfg, np.zeros(dom.total_nodes), flm)
    return dom, op, state


def restrict_to_coarse(dom_ref: MultiBlockDomain, u_ref: np.ndarray,
                       dom_c: MultiBlockDomain) -> np.ndarray:
    """Reference solution sampled at the coarse logical nodes, blockwise.

    Uses direct restriction when the grids nest and bicubic Hermite
    interpolation in logical coordinates otherwise.
    """
    offs_ref = dom_ref.block_offsets()
    out = []
    for b, blk_c in enumerate(dom_c.blocks):
        blk_r = dom_ref.blocks[b]
        stride_num = blk_r.nq - 1
        stride_den = blk_c.nq - 1
        ub_ref = u_ref[offs_ref[b]:offs_ref[b + 1]].reshape(blk_r.shape)
        if stride_num % stride_den == 0 and (blk_r.nr - 1) % (blk_c.nr - 1) == 0:
            sq = stride_num // stride_den
            sr = (blk_r.nr - 1) // (blk_c.nr - 1)
            out.append(ub_ref[::sq, ::sr].ravel())
        else:
            qg, rg = np.meshgrid(np.linspace(0, 1, blk_c.nq),
                                 np.linspace(0, 1, blk_c.nr), indexing="ij")
            vals = hermite_eval_logical(dom_ref, u_ref, b,
                                        qg.ravel(), rg.ravel())
            out.append(vals)
    return np.concatenate(out)


def run_island_self_convergence(cfg: ExperimentConfig, gamma: float = 0.0,
                                verbose: bool = True):
    """Self-convergence against a fine-grid reference, per order and kappa_par."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    rows = []
    results = {}
    for order in cfg.orders:
        for kpar in cfg.kappa_par:
            if verbose:
                print(f"[island] reference n={cfg.reference_n} order={order} "
                      f"kpar={kpar:g}", flush=True)
            dom_ref, op_ref, st_ref = _island_run(cfg.reference_n, order,
                                                  gamma, kpar, cfg)
            errs = []
            for n in cfg.n_list:
                dom_c, op_c, st_c = _island_run(n, order, gamma, kpar, cfg)
                u_star = restrict_to_coarse(dom_ref, st_ref.u, dom_c)
                err = relative_error(st_c.u, u_star, op_c.h_diag())
                errs.append(err)
                if verbose:
                    print(f"[island] order={order} kpar={kpar:g} n={n} "
                          f"err={err:.4e}", flush=True)
            rates = [""] + [f"{r:.6f}" for r in
                            convergence_rates(errs, cfg.n_list)]
            for n, e, r in zip(cfg.n_list, errs, rates):
                rows.append([order, gamma, repr(kpar), n, repr(e), r])
            results[(order, kpar)] = errs
            snap = os.path.join(cfg.out_dir,
                                f"island_ref_o{order}_k{kpar:.0e}.csv")
            dump_snapshot_csv(dom_ref, st_ref.u, st_ref.t, snap)
            diag = os.path.join(cfg.out_dir,
                                f"island_diag_o{order}_k{kpar:.0e}.csv")
            dump_diagnostics_csv(st_ref, cfg.dt_scale_island
                                 / (cfg.reference_n - 1) ** 2, diag)
    _write_convergence_csv(os.path.join(cfg.out_dir, "convergence_island.csv"),
                           rows)
    return rows, results


def _audit_configs(cfg: ExperimentConfig):
    out = []
    for order in cfg.orders:
        n = 11 if order == 2 else 13
        ident = build_from_mapping(lambda q, r: (q, r), n, n, order)
        s = build_sbp_set(order, n, 1.0 / (n - 1))
        one = MultiBlockDomain(
            blocks=(ident,), interfaces=(),
            exterior_boundaries=tuple((0, f, "dirichlet")
                                      for f in ("q_lo", "q_hi", "r_lo", "r_hi")),
            sbp_sets=((s, s),), order=order)
        out.append((f"one-block-cartesian-o{order}", one))
        out.append((f"two-block-cartesian-o{order}",
                    build_two_block_cartesian(n, order)))
        for gamma in cfg.gammas:
            out.append((f"two-block-annulus-o{order}-g{gamma}",
                        build_square_annulus_pair(n, gamma, order)))
            out.append((f"five-block-o{order}-g{gamma}",
                        build_circle_five_block(n, n, gamma, order=order)))
    return out


def run_stability_audit(cfg: ExperimentConfig, negative_control: bool = False,
                        verbose: bool = True):
    """Energy/lemma audits over the configuration matrix; returns reports.

    With negative_control=True, also audits each configuration with halved
    zeroth-order penalties, expecting the lemma audit to fail.
    """
    os.makedirs(cfg.out_dir, exist_ok=True)
    rows = []
    all_ok = True
    for name, dom in _audit_configs(cfg):
        flds = [assemble_diffusion_field(b, cfg.kperp) for b in dom.blocks]
        op = PerpOperator(dom, flds)
        energy = check_energy_stability(op, name)
        lemma = audit_lemma_matrices(op, name)
        ok = energy.passed and lemma.passed
        all_ok &= ok
        rows.append([name, energy.n_unknowns, repr(energy.eigmax),
                     repr(energy.symmetry_defect), energy.passed,
                     lemma.passed, "positive"])
        if verbose:
            print(f"[stability] {name}: eigmax={energy.eigmax:.3e} "
                  f"energy={energy.passed} lemma={lemma.passed}", flush=True)
        if negative_control and dom.interfaces:
            weak = PerpOperator(dom, flds, op.penalties.scaled(0.5))
            lem_w = audit_lemma_matrices(weak, name + "-halved")
            expected_fail = not lem_w.passed
            all_ok &= expected_fail
            rows.append([name + "-halved", weak.n_total, "",
                         "", "", lem_w.passed, "negative-control"])
            if verbose:
                print(f"[stability] {name}-halved: lemma={lem_w.passed} "
                      f"(expected False)", flush=True)
    with open(os.path.join(cfg.out_dir, "stability.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["config", "n_unknowns", "eigmax", "symmetry_defect",
                    "energy_pass", "lemma_pass", "kind"])
        for r in rows:
            w.writerow(r)
    return rows, all_ok


def run_trace(cfg: ExperimentConfig, gamma: float = 0.0, n: int | None = None,
              n_seeds: int = 12, n_transits: int = 200):
    """Field-line map and Poincare dumps for visual audit."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    n = n if n is not None else cfg.n_list[0]
    order = cfg.orders[0]
    dom = _island_domain(n, order, gamma, cfg)
    fld = field_defs.make_field("island", delta=cfg.delta, r1=cfg.r1)
    pcfg = ParallelConfig(kappa_par=cfg.kappa_par[0], substeps=cfg.substeps)
    flm = trace_field_lines(dom, fld, pcfg)
    dump_map_csv(flm, os.path.join(cfg.out_dir, "fieldline_map.csv"))
    dump_mesh_csv(dom, os.path.join(cfg.out_dir, "mesh.csv"))
    seeds = np.stack([np.linspace(0.3, 0.95, n_seeds),
                      np.zeros(n_seeds)], axis=1)
    pts, escaped = field_defs.poincare_section(fld, seeds, n_transits,
                                               substeps=cfg.substeps)
    field_defs.dump_poincare_csv(pts, os.path.join(cfg.out_dir, "poincare.csv"))
    return flm, pts, escaped
