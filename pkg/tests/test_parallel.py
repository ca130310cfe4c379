"""Field-line map construction, interpolation, and the parallel stage."""

import numpy as np
import pytest

from anisoheat.fields import make_field
from anisoheat.mesh import (PackingParams, build_circle_five_block,
                            build_two_block_cartesian)
from anisoheat.parallel import (ParallelConfig, apply_parallel_map,
                                assemble_parallel_dense,
                                audit_parallel_stability, compute_tau_parallel,
                                hermite_eval_logical, parallel_update,
                                trace_field_lines)


@pytest.fixture(scope="module")
def circle_dom():
    return build_circle_five_block(17, 17, 0.0, order=2)


@pytest.fixture(scope="module")
def island_map(circle_dom):
    cfg = ParallelConfig(kappa_par=1e6, substeps=32)
    return trace_field_lines(circle_dom, make_field("island"), cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        ParallelConfig(alpha=0.0)
    with pytest.raises(ValueError):
        ParallelConfig(beta=-1.0)
    with pytest.raises(ValueError):
        ParallelConfig(substeps=2)


def test_zero_field_identity_map(circle_dom):
    cfg = ParallelConfig(substeps=8)
    flm = trace_field_lines(circle_dom, make_field("zero"), cfg)
    xs = np.concatenate([b.x.ravel() for b in circle_dom.blocks])
    ys = np.concatenate([b.y.ravel() for b in circle_dom.blocks])
    assert np.allclose(flm.forward.target_xy[:, 0], xs, atol=1e-12)
    assert np.allclose(flm.forward.target_xy[:, 1], ys, atol=1e-12)
    u = np.sin(xs) + ys
    wf, wb, w = apply_parallel_map(flm, u)
    assert np.max(np.abs(w - u)) < 1e-10


def test_constant_reproduction(island_map, circle_dom):
    u = np.full(circle_dom.total_nodes, 2.5)
    wf, wb, w = apply_parallel_map(island_map, u, g=2.5)
    assert np.max(np.abs(w - 2.5)) < 1e-12


def test_linear_exactness_cartesian_block():
    dom = build_two_block_cartesian(13, 2)
    cfg = ParallelConfig(substeps=8, delta_zeta=1.0, stop_radius=None)
    field = lambda x, y: (np.full_like(x, 0.02), np.full_like(y, 0.015))
    flm = trace_field_lines(dom, field, cfg)
    xs = np.concatenate([b.x.ravel() for b in dom.blocks])
    ys = np.concatenate([b.y.ravel() for b in dom.blocks])
    u = 3.0 * xs - 2.0 * ys + 0.5
    wf, wb, w = apply_parallel_map(flm, u)
    xf, yf = flm.forward.target_xy.T
    xb, yb = flm.backward.target_xy.T
    # targets drifting past the square take boundary data; compare in-domain
    okf = ~flm.forward.oob
    okb = ~flm.backward.oob
    assert okf.sum() > 0.8 * okf.size
    assert np.max(np.abs((wf - (3 * xf - 2 * yf + 0.5))[okf])) < 1e-11
    assert np.max(np.abs((wb - (3 * xb - 2 * yb + 0.5))[okb])) < 1e-11


def test_island_traces_stay_on_flux_surfaces(circle_dom):
    cfg = ParallelConfig(substeps=64)
    flm = trace_field_lines(circle_dom, make_field("island", delta=0.0), cfg)
    xs = np.concatenate([b.x.ravel() for b in circle_dom.blocks])
    ys = np.concatenate([b.y.ravel() for b in circle_dom.blocks])
    r0 = np.hypot(xs, ys)
    rf = np.hypot(flm.forward.target_xy[:, 0], flm.forward.target_xy[:, 1])
    # the unperturbed rotation rate diverges toward the axis, so restrict to
    # radii the fixed substep count resolves
    ok = ~flm.forward.oob & (r0 > 0.25)
    assert np.max(np.abs(rf[ok] - r0[ok])) < 1e-5


def test_interpolation_refinement(circle_dom):
    # smooth-field interpolation error decays at order >= 2 under refinement
    errs = []
    cfg = ParallelConfig(substeps=32)
    fld = make_field("island")
    for n in (11, 21, 41):
        dom = build_circle_five_block(n, n, 0.0, order=2)
        flm = trace_field_lines(dom, fld, cfg)
        xs = np.concatenate([b.x.ravel() for b in dom.blocks])
        ys = np.concatenate([b.y.ravel() for b in dom.blocks])
        u = np.exp(-2 * (xs**2 + ys**2))
        wf, wb, w = apply_parallel_map(
            flm, u, g=lambda px, py: np.exp(-2 * (px**2 + py**2)))
        xf, yf = flm.forward.target_xy.T
        exact_f = np.exp(-2 * (xf**2 + yf**2))
        errs.append(np.max(np.abs(wf - exact_f)))
    rates = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert rates[-1] > 1.85, (errs, rates)


def test_forward_backward_composition(circle_dom):
    # delta=0: forward then backward returns to the start within tolerance
    cfg = ParallelConfig(substeps=64)
    fld = make_field("island", delta=0.0)
    from anisoheat.fields import rk4_trace
    xs = np.concatenate([b.x.ravel() for b in circle_dom.blocks])
    ys = np.concatenate([b.y.ravel() for b in circle_dom.blocks])
    r0 = np.hypot(xs, ys)
    keep = (r0 > 0.25) & (r0 < 0.95)
    xf, yf, *_ = rk4_trace(fld, xs[keep], ys[keep], 2 * np.pi, 128)
    xb, yb, *_ = rk4_trace(fld, xf, yf, -2 * np.pi, 128)
    # return error is bounded by twice the RK4 trace tolerance
    assert np.max(np.hypot(xb - xs[keep], yb - ys[keep])) < 2e-4


def test_tau_parallel_values():
    cfg = ParallelConfig(alpha=0.1, beta=2.0)
    h = np.full(10, 0.3)
    u = np.ones(10)
    assert compute_tau_parallel(u, u, h, cfg) == 0.0
    assert np.isclose(compute_tau_parallel(u, 2 * u, h, cfg), 0.1)
    w = u - 0.5 * u
    assert np.isclose(compute_tau_parallel(u, w, h, cfg), 0.025)
    assert compute_tau_parallel(0 * u, u, h, cfg) == 0.0


def test_parallel_update_identities():
    cfg = ParallelConfig(kappa_par=1.0)
    rng = np.random.default_rng(8)
    h = 0.5 + rng.random(20)
    u = rng.standard_normal(20)
    w = rng.standard_normal(20)
    assert np.array_equal(parallel_update(u, w, 0.0, cfg, h), u)
    assert np.allclose(parallel_update(w, w, 0.7, cfg, h), w, atol=1e-14)
    big = ParallelConfig(kappa_par=1e12)
    out = parallel_update(u, w, 1.0, big, np.ones(20))
    assert np.max(np.abs(out - w)) < 1e-6 * max(1.0, np.max(np.abs(u - w)))


def test_parallel_update_convex_combination():
    cfg = ParallelConfig(kappa_par=123.0)
    rng = np.random.default_rng(15)
    h = 0.1 + rng.random(1000)
    u = rng.standard_normal(1000)
    w = rng.standard_normal(1000)
    out = parallel_update(u, w, 0.42, cfg, h)
    lo = np.minimum(u, w) - 1e-13
    hi = np.maximum(u, w) + 1e-13
    assert np.all(out >= lo) and np.all(out <= hi)
    assert np.all(np.abs(out - w) <= np.abs(u - w) + 1e-13)


def test_parallel_update_dt_factor():
    cfg = ParallelConfig(kappa_par=10.0, include_dt_factor=True)
    h = np.ones(4)
    u = np.array([1.0, 2.0, 3.0, 4.0])
    w = np.zeros(4)
    out = parallel_update(u, w, 1.0, cfg, h, dt=0.5)
    assert np.allclose(out, u / (1.0 + 0.5 * 10.0))


def test_hermite_eval_logical_matches_nodes(circle_dom):
    rng = np.random.default_rng(3)
    u = rng.standard_normal(circle_dom.total_nodes)
    blk = circle_dom.blocks[0]
    qs = np.linspace(0, 1, blk.nq)
    vals = hermite_eval_logical(circle_dom, u, 0, qs, np.zeros_like(qs))
    assert np.allclose(vals, u[:blk.size].reshape(blk.shape)[:, 0], atol=1e-12)


def test_out_of_domain_takes_boundary_value():
    dom = build_circle_five_block(13, 13, 0.0, order=2)
    cfg = ParallelConfig(substeps=16)
    # strong outward drift: most traces exit the disk
    field = lambda x, y: (np.full_like(x, 0.5), np.zeros_like(y))
    flm = trace_field_lines(dom, field, cfg)
    assert flm.forward.oob.sum() > 0
    exit_r = np.hypot(flm.forward.exit_xy[flm.forward.oob, 0],
                      flm.forward.exit_xy[flm.forward.oob, 1])
    assert np.allclose(exit_r, 1.0, atol=1e-12)
    u = np.zeros(dom.total_nodes)
    wf, _, _ = apply_parallel_map(flm, u, g=lambda px, py: px)
    assert np.allclose(wf[flm.forward.oob],
                       flm.forward.exit_xy[flm.forward.oob, 0], atol=1e-14)


def test_parallel_stability_audit_runs():
    dom = build_circle_five_block(9, 9, 0.0, order=2)
    cfg = ParallelConfig(substeps=16)
    flm = trace_field_lines(dom, make_field("island"), cfg)
    pf, pb = assemble_parallel_dense(flm)
    # interpolation rows reproduce constants (rows with in-domain targets)
    ok = ~flm.forward.oob
    assert np.allclose((pf @ np.ones(dom.total_nodes))[ok], 1.0, atol=1e-10)
    h = np.ones(dom.total_nodes)
    rep = audit_parallel_stability(flm, h, tau_kappa=1.0)
    # the sign condition depends on the interpolation weights; report honestly
    assert np.isfinite(rep.eigmax)
    assert rep.s_norm > 0


def test_packed_mesh_trace_and_interp():
    dom = build_circle_five_block(17, 17, 0.0,
                                  packing=PackingParams(0.1, None), order=2)
    cfg = ParallelConfig(substeps=32)
    flm = trace_field_lines(dom, make_field("island"), cfg)
    unlocated = np.sum((flm.forward.block < 0) & ~flm.forward.oob)
    assert unlocated == 0
    u = np.full(dom.total_nodes, 1.7)
    _, _, w = apply_parallel_map(flm, u, g=1.7)
    assert np.max(np.abs(w - 1.7)) < 1e-12
