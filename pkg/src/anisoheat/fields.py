"""Analytic magnetic fields, tracing primitives, and Poincare sections.

Field evaluators are pure callables (x, y) -> (Bx, By) registered by name so
experiment configs can select them as strings.  The single-island field is
the flux function psi(r, theta) = (r - r1)^2 + delta (r - 1/2)(1 - r) cos
(theta) with B = grad(psi) x z-hat.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

__all__ = ["IslandFieldParams", "island_field_eval", "island_source",
           "rk4_trace", "poincare_section", "make_field", "FIELD_REGISTRY"]


@dataclass(frozen=True)
class IslandFieldParams:
    """Single magnetic island: perturbation delta, resonant radius r1."""

    delta: float = 0.05
    r1: float = 0.7

    def __post_init__(self):
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta={self.delta} outside [0, 1)")
        if not 0.0 < self.r1 < 1.0:
            raise ValueError(f"r1={self.r1} outside (0, 1)")


def island_field_eval(x, y, p: IslandFieldParams = IslandFieldParams()):
    """Poloidal island field B = grad(psi) x z-hat, via the polar chain rule.

    Raises on evaluation at the polar singularity (radius below 1e-14).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.hypot(x, y)
    if np.any(r < 1e-14):
        raise ValueError("island field is singular at the origin")
    cos_t = x / r
    sin_t = y / r
    psi_r = 2.0 * (r - p.r1) + p.delta * (1.5 - 2.0 * r) * cos_t
    psi_t = -p.delta * (r - 0.5) * (1.0 - r) * sin_t
    # grad psi = psi_r * rhat + (psi_t / r) * that;  B = grad psi x zhat
    bx = psi_r * sin_t + psi_t * cos_t / r
    by = -psi_r * cos_t + psi_t * sin_t / r
    return bx, by


def island_source(x, y):
    """Axisymmetric heat source Q = 4 (1 - r^2)^8."""
    r2 = np.asarray(x, dtype=float) ** 2 + np.asarray(y, dtype=float) ** 2
    return 4.0 * (1.0 - r2) ** 8


def island_polar_rates(p: IslandFieldParams = IslandFieldParams()):
    """Field-line rates in field coordinates: (dr/dzeta, dtheta/dzeta).

    Tracing in (r, theta) keeps the unperturbed flux-surface radius exact for
    arbitrarily fast rotation near the axis, which Cartesian integration
    cannot; the landing point is mapped back to (x, y) afterwards.
    """

    def rates(r, theta):
        cos_t = np.cos(theta)
        sin_t = np.sin(theta)
        psi_r = 2.0 * (r - p.r1) + p.delta * (1.5 - 2.0 * r) * cos_t
        psi_t = -p.delta * (r - 0.5) * (1.0 - r) * sin_t
        return psi_t / r, -psi_r / r

    return rates


def rk4_trace(field, x0, y0, dzeta: float, substeps: int,
              stop_radius: float | None = 1.0):
    """Classical fixed-step RK4 integration of dX/dzeta = B(X).

    Returns (x, y, oob, x_exit, y_exit): trajectories that leave the disk of
    `stop_radius` are frozen at their (interpolated) first crossing point and
    flagged.  Pass stop_radius=None to disable the exit check.
    """
    x = np.array(x0, dtype=float, copy=True)
    y = np.array(y0, dtype=float, copy=True)
    oob = np.zeros(x.shape, dtype=bool)
    x_exit = np.zeros_like(x)
    y_exit = np.zeros_like(y)
    h = dzeta / substeps
    for _ in range(substeps):
        active = ~oob
        if not np.any(active):
            break
        xa, ya = x[active], y[active]
        k1x, k1y = field(xa, ya)
        k2x, k2y = field(xa + 0.5 * h * k1x, ya + 0.5 * h * k1y)
        k3x, k3y = field(xa + 0.5 * h * k2x, ya + 0.5 * h * k2y)
        k4x, k4y = field(xa + h * k3x, ya + h * k3y)
        xn = xa + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        yn = ya + h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
        if stop_radius is not None:
            rn = np.hypot(xn, yn)
            crossed = rn > stop_radius * (1.0 + 1e-12)
            if np.any(crossed):
                # project the first out-of-domain position back to the circle
                idx = np.flatnonzero(active)[crossed]
                x_exit.flat[idx] = (xn[crossed] / rn[crossed]) * stop_radius
                y_exit.flat[idx] = (yn[crossed] / rn[crossed]) * stop_radius
                oob.flat[idx] = True
        x[active] = xn
        y[active] = yn
    x = np.where(oob, x_exit, x)
    y = np.where(oob, y_exit, y)
    return x, y, oob, x_exit, y_exit


def rk4_trace_polar(rates, x0, y0, dzeta: float, substeps: int,
                    stop_radius: float | None = 1.0,
                    min_radius: float = 5e-3):
    """RK4 field-line integration in polar field coordinates.

    `rates(r, theta)` returns (dr/dzeta, dtheta/dzeta).  Same return contract
    as rk4_trace; trajectories crossing stop_radius are frozen on the circle.
    Trajectories sinking below min_radius approach the coordinate/field
    singularity at the axis, where the field-line map is ill defined; they
    are reset to their starting point (an identity target).
    """
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    r = np.hypot(x0, y0)
    th = np.arctan2(y0, x0)
    r_start = r.copy()
    th_start = th.copy()
    oob = np.zeros(r.shape, dtype=bool)
    sunk = np.zeros(r.shape, dtype=bool)
    r_exit = np.zeros_like(r)
    th_exit = np.zeros_like(th)
    h = dzeta / substeps
    for _ in range(substeps):
        active = ~oob & ~sunk
        if not np.any(active):
            break
        ra, ta = r[active], th[active]
        k1r, k1t = rates(ra, ta)
        k2r, k2t = rates(ra + 0.5 * h * k1r, ta + 0.5 * h * k1t)
        k3r, k3t = rates(ra + 0.5 * h * k2r, ta + 0.5 * h * k2t)
        k4r, k4t = rates(ra + h * k3r, ta + h * k3t)
        rn = ra + h / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r)
        tn = ta + h / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t)
        if stop_radius is not None:
            crossed = rn > stop_radius * (1.0 + 1e-12)
            if np.any(crossed):
                idx = np.flatnonzero(active)[crossed]
                r_exit.flat[idx] = stop_radius
                th_exit.flat[idx] = tn[crossed]
                oob.flat[idx] = True
        dipped = rn < min_radius
        if np.any(dipped):
            sunk.flat[np.flatnonzero(active)[dipped]] = True
        r[active] = rn
        th[active] = tn
    r = np.where(sunk, r_start, r)
    th = np.where(sunk, th_start, th)
    r = np.where(oob, r_exit, r)
    th = np.where(oob, th_exit, th)
    x = r * np.cos(th)
    y = r * np.sin(th)
    xe = r_exit * np.cos(th_exit)
    ye = r_exit * np.sin(th_exit)
    return x, y, oob, xe, ye


def rk4_trace_polar_adaptive(rates, x0, y0, dzeta: float, substeps: int,
                             stop_radius: float | None = 1.0,
                             phase_per_step: float = 0.25):
    """Polar RK4 with per-node dyadic substep refinement.

    Nodes whose initial rotation rate would exceed `phase_per_step` radians
    per substep are integrated with 2^k-fold more substeps (k chosen per
    node), so the fast-winding region near the axis stays resolved while the
    bulk keeps the base cost.  Deterministic for fixed inputs.
    """
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    r0 = np.hypot(x0, y0)
    th0 = np.arctan2(y0, x0)
    _, dth = rates(r0, th0)
    # 4x margin: the rotation rate can grow along the trace when the radial
    # perturbation pushes a trajectory inward
    needed = 4.0 * np.abs(dth) * abs(dzeta) / phase_per_step
    classes = np.maximum(0, np.ceil(np.log2(np.maximum(needed, 1.0)
                                            / substeps))).astype(int)
    x = np.empty_like(x0)
    y = np.empty_like(y0)
    oob = np.zeros(x0.shape, dtype=bool)
    xe = np.zeros_like(x0)
    ye = np.zeros_like(y0)
    for k in np.unique(classes):
        m = classes == k
        res = rk4_trace_polar(rates, x0[m], y0[m], dzeta,
                              substeps * (2 ** int(k)), stop_radius=stop_radius)
        x[m], y[m], oob[m], xe[m], ye[m] = res
    return x, y, oob, xe, ye


def poincare_section(field, seeds, n_transits: int, dzeta: float = 2.0 * np.pi,
                     substeps: int = 64):
    """Iterated transit map: landing points of each seed after k transits.

    Returns (points, escaped) with points shaped (n_seeds, n_transits + 1, 2);
    escaped seeds keep their last in-domain position for later transits.
    """
    seeds = np.asarray(seeds, dtype=float)
    xs = seeds[:, 0].copy()
    ys = seeds[:, 1].copy()
    pts = np.empty((seeds.shape[0], n_transits + 1, 2))
    pts[:, 0, 0] = xs
    pts[:, 0, 1] = ys
    escaped = np.zeros(seeds.shape[0], dtype=bool)
    for k in range(1, n_transits + 1):
        xs, ys, oob, _, _ = rk4_trace(field, xs, ys, dzeta, substeps)
        escaped |= oob
        pts[:, k, 0] = xs
        pts[:, k, 1] = ys
    return pts, escaped


def dump_poincare_csv(points: np.ndarray, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "transit", "x", "y"])
        for s in range(points.shape[0]):
            for k in range(points.shape[1]):
                w.writerow([s, k, repr(float(points[s, k, 0])),
                            repr(float(points[s, k, 1]))])


def _spec_stub(**_kwargs):
    raise NotImplementedError(
        "SPEC equilibrium fields are an extension point; no reader ships")


def make_field(name: str, **params):
    """Look up a field evaluator factory by name."""
    try:
        return FIELD_REGISTRY[name](**params)
    except KeyError:
        raise KeyError(f"unknown field '{name}'; known: {sorted(FIELD_REGISTRY)}")


def _make_island(delta=0.05, r1=0.7):
    p = IslandFieldParams(delta, r1)

    def field(x, y):
        return island_field_eval(x, y, p)

    field.polar_rates = island_polar_rates(p)
    field.params = p
    return field


FIELD_REGISTRY = {
    "island": _make_island,
    "zero": lambda: (lambda x, y: (np.zeros_like(np.asarray(x, dtype=float)),
                                   np.zeros_like(np.asarray(y, dtype=float)))),
    "uniform": lambda bx=1.0, by=0.0: (
        lambda x, y: (np.full_like(np.asarray(x, dtype=float), bx),
                      np.full_like(np.asarray(y, dtype=float), by))),
    "spec": _spec_stub,
}
