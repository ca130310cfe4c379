"""Acceptance suite: every gate criterion at its stated tolerance.

Each test prints one PASS/FAIL line (and its runtime against the stated
budget).  Run order follows the numbering in the test names; the convergence
studies (05, 06) dominate the wall time.
"""

import time

import numpy as np

from anisoheat.fields import island_source, make_field
from anisoheat.harness import (ExperimentConfig, convergence_rates,
                               run_island_self_convergence, run_mms_experiment)
from anisoheat.mesh import (MultiBlockDomain, PackingParams,
                            assemble_diffusion_field, build_circle_five_block,
                            build_from_mapping, build_two_block_cartesian,
                            build_square_annulus_pair)
from anisoheat.parallel import (ParallelConfig, compute_tau_parallel,
                                parallel_update, trace_field_lines)
from anisoheat.perp import (PerpOperator, audit_lemma_matrices,
                            check_energy_stability)
from anisoheat.sbp import build_sbp_set, dense_d1, dense_remainder
from anisoheat.solver import SolveConfig, run


def _report(name: str, passed: bool, detail: str, elapsed: float,
            limit: float) -> None:
    status = "PASS" if passed else "FAIL"
    print(f"\nACCEPTANCE {status}: {name} [{elapsed:.1f}s / {limit:.0f}s] {detail}",
          flush=True)
    assert passed, f"{name}: {detail}"
    assert elapsed < limit, f"{name}: runtime {elapsed:.1f}s over {limit:.0f}s"


def test_01_sbp_identity_suite():
    t0 = time.time()
    rng = np.random.default_rng(1234)
    worst_q = 0.0
    worst_eig = 0.0
    for order in (2, 4):
        for n in (16, 33, 64):
            s = build_sbp_set(order, n, 1.0 / (n - 1))
            k = 0.1 + rng.random(n)
            d1 = dense_d1(s)
            q = np.diag(s.h_weights) @ d1
            b = np.zeros((n, n))
            b[0, 0], b[-1, -1] = -1.0, 1.0
            worst_q = max(worst_q, float(np.max(np.abs(q + q.T - b))))
            r = dense_remainder(s, k)
            eigs = np.linalg.eigvalsh(0.5 * (r + r.T))
            rel = eigs[0] / max(np.max(np.abs(eigs)), 1e-300)
            worst_eig = min(worst_eig, float(rel))
    ok = worst_q < 1e-12 and worst_eig >= -1e-10
    _report("SBP identity suite", ok,
            f"max|Q+Q^T-B|={worst_q:.2e}, rel eigmin(R)={worst_eig:.2e}",
            time.time() - t0, 10.0)


def test_02_lemma_audit_five_block():
    t0 = time.time()
    ok = True
    details = []
    for order in (2, 4):
        for gamma in (0.0, 0.1):
            dom = build_circle_five_block(13, 13, gamma, order=order)
            flds = [assemble_diffusion_field(b, 1.0) for b in dom.blocks]
            op = PerpOperator(dom, flds)
            rep = audit_lemma_matrices(op)
            weak = PerpOperator(dom, flds, op.penalties.scaled(0.5))
            rep_weak = audit_lemma_matrices(weak)
            ok &= rep.passed and not rep_weak.passed
            details.append(f"o{order}/g{gamma}: PSD={rep.passed} "
                           f"halved-fails={not rep_weak.passed}")
    _report("Appendix lemma audit", ok, "; ".join(details),
            time.time() - t0, 30.0)


def test_03_energy_audit_dense():
    t0 = time.time()
    ok = True
    details = []
    configs = []
    for order, n in ((2, 11), (4, 13)):
        configs.append((f"two-block-cartesian-o{order}",
                        build_two_block_cartesian(n, order)))
        configs.append((f"two-block-annulus-o{order}",
                        build_square_annulus_pair(n, 0.1, order)))
        configs.append((f"five-block-o{order}",
                        build_circle_five_block(n, n, 0.1, order=order)))
    for name, dom in configs:
        op = PerpOperator(dom, [assemble_diffusion_field(b, 1.0)
                                for b in dom.blocks])
        rep = check_energy_stability(op, name)
        ok &= rep.passed
        details.append(f"{name}: eigmax={rep.eigmax:.1e}")
    _report("Energy-stability dense audit", ok, "; ".join(details),
            time.time() - t0, 120.0)


def test_04_unconditional_stability():
    t0 = time.time()
    dom = build_circle_five_block(17, 17, 0.0,
                                  packing=PackingParams(0.1, None), order=2)
    flds = [assemble_diffusion_field(b, 1.0) for b in dom.blocks]
    op = PerpOperator(dom, flds)
    fld = make_field("island")
    u0 = np.concatenate([island_source(b.x, b.y).ravel() for b in dom.blocks])
    ok = True
    details = []
    for kpar in (1.0e6, 1.0e9):
        pcfg = ParallelConfig(kappa_par=kpar, substeps=32)
        flm = trace_field_lines(dom, fld, pcfg)
        for dt in (1.0e-6, 1.0e-3, 1.0):
            cfg = SolveConfig(dt=dt, t_final=50 * dt, parallel=pcfg)
            state = run(op, cfg, u0, flm)
            h = state.hnorm_history
            mono = all(h[i + 1] <= h[i] * (1 + 1e-12)
                       for i in range(len(h) - 1))
            ok &= mono and len(h) == 51
            details.append(f"k={kpar:.0e},dt={dt:.0e}:{'ok' if mono else 'VIOL'}")
    _report("Unconditional stability (50 steps)", ok, "; ".join(details),
            time.time() - t0, 300.0)


def test_05_mms_convergence():
    t0 = time.time()
    cfg = ExperimentConfig(kind="mms", orders=(2, 4), gammas=(0.0,),
                           n_list=(21, 31, 41, 51, 61),
                           out_dir="out/acceptance_mms")
    _rows, results = run_mms_experiment(cfg, verbose=True)
    errs2 = results[(2, 0.0)]
    rates2 = convergence_rates(errs2, cfg.n_list)
    errs4 = results[(4, 0.0)][1:]          # order 4 judged over n >= 31
    rates4 = convergence_rates(errs4, cfg.n_list[1:])
    ok2 = abs(rates2[-1] - 2.0) <= 0.3
    ok4 = abs(rates4[-1] - 4.0) <= 0.5
    _report("MMS convergence", ok2 and ok4,
            f"order2 terminal rate {rates2[-1]:.2f} (2.0+-0.3), "
            f"order4 terminal rate {rates4[-1]:.2f} (4.0+-0.5); "
            f"rates2={[f'{r:.2f}' for r in rates2]}, "
            f"rates4={[f'{r:.2f}' for r in rates4]}",
            time.time() - t0, 1200.0)


def test_06_island_self_convergence():
    t0 = time.time()
    cfg = ExperimentConfig(kind="island", orders=(2, 4), gammas=(0.0,),
                           n_list=(21, 31, 41, 51), kappa_par=(1.0e6, 1.0e9),
                           reference_n=81, island_t_final=1.0e-2,
                           substeps=64, cg_rel_tol=1e-9,
                           out_dir="out/acceptance_island")
    _rows, results = run_island_self_convergence(cfg, verbose=True)
    ok = True
    details = []
    for kpar in cfg.kappa_par:
        e2 = results[(2, kpar)]
        e4 = results[(4, kpar)]
        rates2 = convergence_rates(e2, cfg.n_list)
        avg2 = float(np.mean(rates2))
        ratios = [a / b for a, b in zip(e2, e4)]
        gmean = float(np.exp(np.mean(np.log(ratios))))
        rate_ok = 0.8 <= avg2 <= 2.2
        below_ok = all(b < a for a, b in zip(e2, e4))
        gap_ok = gmean >= 3.0
        ok &= rate_ok and below_ok and gap_ok
        details.append(
            f"k={kpar:.0e}: o2 avg rate {avg2:.2f} in [0.8,2.2]:{rate_ok}, "
            f"o4<o2 per n:{below_ok}, gap gmean {gmean:.2f}>=3:{gap_ok}, "
            f"ratios={[f'{r:.1f}' for r in ratios]}")
    _report("Island self-convergence", ok, "; ".join(details),
            time.time() - t0, 2700.0)


def test_07_parallel_stage_properties():
    t0 = time.time()
    cfg = ParallelConfig(alpha=0.1, beta=2.0, kappa_par=5.0)
    rng = np.random.default_rng(77)
    h = np.full(64, 0.21)
    u = rng.standard_normal(64)
    tau_same = compute_tau_parallel(u, u, h, cfg)
    tau_unit = compute_tau_parallel(u, 2.0 * u, h, cfg)
    ok = tau_same == 0.0 and np.isclose(tau_unit, 0.1, atol=1e-14)

    n = 100_000
    hr = 0.05 + rng.random(n)
    uu = rng.standard_normal(n)
    ww = rng.standard_normal(n)
    out = parallel_update(uu, ww, 0.37, cfg, hr)
    lo = np.minimum(uu, ww) - 1e-13
    hi = np.maximum(uu, ww) + 1e-13
    convex = bool(np.all(out >= lo) and np.all(out <= hi))
    contract = bool(np.all(np.abs(out - ww) <= np.abs(uu - ww) + 1e-13))
    ok &= convex and contract
    _report("Parallel-stage properties", ok,
            f"tau(u=w)={tau_same}, tau(unit)={tau_unit:.3f}, "
            f"convex={convex}, contraction={contract} on {n} triples",
            time.time() - t0, 60.0)


def test_08_field_tracing_order():
    t0 = time.time()
    from anisoheat.fields import rk4_trace
    fld = make_field("island", delta=0.0)
    th = np.linspace(0, 2 * np.pi, 9)[:-1]
    x0, y0 = 0.5 * np.cos(th), 0.5 * np.sin(th)
    xr, yr, *_ = rk4_trace(fld, x0, y0, 2 * np.pi, 4096)
    subs = (16, 32, 64, 128)
    errs = []
    drifts = []
    for ss in subs:
        x1, y1, *_ = rk4_trace(fld, x0, y0, 2 * np.pi, ss)
        errs.append(float(np.max(np.hypot(x1 - xr, y1 - yr))))
        drifts.append(float(np.max(np.abs(np.hypot(x1, y1) - 0.5))))
    rates = [np.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
    terminal = rates[-1]
    ok = abs(terminal - 4.0) <= 0.2
    # radius drift is bounded by the same fourth-order envelope
    bound_ok = all(d <= 10.0 * (subs[0] / s) ** 4 * max(drifts[0], 1e-12)
                   for d, s in zip(drifts, subs))
    _report("Field-tracing order", ok and bound_ok,
            f"terminal rate {terminal:.3f} (4.0+-0.2), "
            f"rates={[f'{r:.2f}' for r in rates]}, "
            f"drift bound ok={bound_ok}",
            time.time() - t0, 120.0)
