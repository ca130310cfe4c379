"""Curvilinear multi-block meshes built from transfinite interpolation.

Blocks are logically rectangular maps (q, r) in [0,1]^2 -> (x, y), sampled on
uniform logical grids and differentiated with the SBP operators so that the
discrete metric terms inherit the operators' accuracy.  The five-block disk
(dilated interior square plus four annular sectors) used by the convergence
experiments is constructed here, along with small helper topologies for
stability audits and tests.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .sbp import SbpSet1D, apply_d1, build_sbp_set

__all__ = [
    "BoundaryCurve", "PackingParams", "pack_points", "coons_patch",
    "BlockMesh", "Interface", "MultiBlockDomain", "DiffusionField",
    "compute_metrics", "assemble_diffusion_field", "build_from_mapping",
    "build_circle_five_block", "build_two_block_cartesian",
    "build_square_annulus_pair", "dump_mesh_csv",
    "FACE_AXIS", "FACE_END", "face_values", "face_coordinates",
]


# Faces are named by the logical axis and end they live on.
FACE_AXIS = {"q_lo": 0, "q_hi": 0, "r_lo": 1, "r_hi": 1}
FACE_END = {"q_lo": 0, "q_hi": -1, "r_lo": 0, "r_hi": -1}


def face_values(arr: np.ndarray, face: str) -> np.ndarray:
    """Boundary line of a (nq, nr) nodal array, indexed by the tangential coordinate."""
    if FACE_AXIS[face] == 0:
        return arr[FACE_END[face], :]
    return arr[:, FACE_END[face]]


def face_coordinates(block: "BlockMesh", face: str) -> np.ndarray:
    """Physical (m, 2) coordinates along a block face."""
    return np.stack([face_values(block.x, face), face_values(block.y, face)], axis=1)


class BoundaryCurve:
    """Parametric boundary curve s in [0,1] -> (x, y)."""

    def __init__(self, evaluator: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]):
        self.evaluator = evaluator

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        x, y = self.evaluator(s)
        return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def line_curve(p0: Sequence[float], p1: Sequence[float]) -> BoundaryCurve:
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    return BoundaryCurve(lambda s: (p0[0] + s * (p1[0] - p0[0]),
                                    p0[1] + s * (p1[1] - p0[1])))


def arc_curve(theta0: float, theta1: float, radius: float = 1.0) -> BoundaryCurve:
    return BoundaryCurve(lambda s: (radius * np.cos(theta0 + s * (theta1 - theta0)),
                                    radius * np.sin(theta0 + s * (theta1 - theta0))))


@dataclass(frozen=True)
class PackingParams:
    """Grid-packing controls: tightness alpha_pack, packing center r_s in [0,1].

    r_s=None lets the mesh builder place the center at the logical preimage
    of physical radius 0.7 (the island separatrix region).
    """

    alpha_pack: float = 0.1
    r_s: float | None = None

    def __post_init__(self):
        if self.alpha_pack < 0.05:
            raise ValueError(
                f"alpha_pack={self.alpha_pack} too tight; values below 0.05 break "
                "the parallel interpolation step")
        if self.alpha_pack < 0.08:
            warnings.warn(f"alpha_pack={self.alpha_pack} is close to the failure "
                          "threshold 0.05", stacklevel=2)
        if self.r_s is not None and not 0.0 <= self.r_s <= 1.0:
            raise ValueError(f"packing center r_s={self.r_s} outside [0,1]")


def pack_points(s, p: PackingParams):
    """Monotone sinh reparameterization of [0,1] concentrating nodes at r_s."""
    if p.r_s is None:
        raise ValueError("packing center r_s unresolved; construct PackingParams "
                         "with an explicit r_s or let the mesh builder choose it")
    s = np.asarray(s, dtype=float)
    a = p.alpha_pack
    lo = math.asinh(-p.r_s / a)
    hi = math.asinh((1.0 - p.r_s) / a)
    return p.r_s + a * np.sinh(hi * s + lo * (1.0 - s))


def coons_patch(c1: BoundaryCurve, c2: BoundaryCurve, c3: BoundaryCurve,
                c4: BoundaryCurve, nq: int, nr: int,
                q_params: np.ndarray | None = None,
                r_params: np.ndarray | None = None,
                corner_tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Bilinearly blended Coons patch through four boundary curves.

    c1 = south (parameter along q), c2 = east (along r), c3 = north (along q),
    c4 = west (along r).  Returns (x, y) arrays of shape (nq, nr).
    """
    if nq < 3 or nr < 3:
        raise ValueError("need at least 3 nodes per direction")
    u = np.linspace(0.0, 1.0, nq) if q_params is None else np.asarray(q_params, float)
    v = np.linspace(0.0, 1.0, nr) if r_params is None else np.asarray(r_params, float)

    s1x, s1y = c1(u)
    s3x, s3y = c3(u)
    s4x, s4y = c4(v)
    s2x, s2y = c2(v)

    corners = {
        "p00": (c1(np.array(0.0)), c4(np.array(0.0))),
        "p10": (c1(np.array(1.0)), c2(np.array(0.0))),
        "p01": (c3(np.array(0.0)), c4(np.array(1.0))),
        "p11": (c3(np.array(1.0)), c2(np.array(1.0))),
    }
    for name, (a, b) in corners.items():
        gap = math.hypot(float(a[0]) - float(b[0]), float(a[1]) - float(b[1]))
        if gap > corner_tol:
            raise ValueError(f"boundary curves disagree at corner {name} by {gap:.3e}")

    p00 = np.array([float(v_) for v_ in c1(np.array(0.0))])
    p10 = np.array([float(v_) for v_ in c1(np.array(1.0))])
    p01 = np.array([float(v_) for v_ in c3(np.array(0.0))])
    p11 = np.array([float(v_) for v_ in c3(np.array(1.0))])

    uu = u[:, None]
    vv = v[None, :]

    def blend(s1, s3, s4, s2, a00, a10, a01, a11):
        lr = (1.0 - vv) * s1[:, None] + vv * s3[:, None]
        bt = (1.0 - uu) * s4[None, :] + uu * s2[None, :]
        bil = ((1.0 - uu) * (1.0 - vv) * a00 + uu * (1.0 - vv) * a10
               + (1.0 - uu) * vv * a01 + uu * vv * a11)
        return lr + bt - bil

    x = blend(s1x, s3x, s4x, s2x, p00[0], p10[0], p01[0], p11[0])
    y = blend(s1y, s3y, s4y, s2y, p00[1], p10[1], p01[1], p11[1])
    return x, y


@dataclass(frozen=True)
class BlockMesh:
    """One logically rectangular curvilinear block with SBP metric data."""

    nq: int
    nr: int
    x: np.ndarray
    y: np.ndarray
    jac: np.ndarray
    qx: np.ndarray
    qy: np.ndarray
    rx: np.ndarray
    ry: np.ndarray
    dq: float
    dr: float
    # analytic map (logical -> physical), kept for point location / tracing
    mapping: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]] | None \
        = field(default=None, compare=False, repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nq, self.nr)

    @property
    def size(self) -> int:
        return self.nq * self.nr


@dataclass(frozen=True)
class Interface:
    """Conforming interface: face of block_a matched to face of block_b.

    Tangential index i of side a meets index i of side b, or n-1-i when
    flip is set.
    """

    block_a: int
    face_a: str
    block_b: int
    face_b: str
    flip: bool = False


@dataclass(frozen=True)
class MultiBlockDomain:
    blocks: tuple[BlockMesh, ...]
    interfaces: tuple[Interface, ...]
    exterior_boundaries: tuple[tuple[int, str, str], ...]  # (block, face, bc tag)
    sbp_sets: tuple[tuple[SbpSet1D, SbpSet1D], ...]        # (q, r) per block
    order: int

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def total_nodes(self) -> int:
        return sum(b.size for b in self.blocks)

    def block_offsets(self) -> list[int]:
        offs = [0]
        for b in self.blocks:
            offs.append(offs[-1] + b.size)
        return offs


@dataclass(frozen=True)
class DiffusionField:
    """Nodewise curvilinear diffusion coefficients for one block."""

    kperp: np.ndarray
    kq: np.ndarray
    kr: np.ndarray
    kqr: np.ndarray


class MeshError(ValueError):
    pass


def compute_metrics(x: np.ndarray, y: np.ndarray,
                    sbp_q: SbpSet1D, sbp_r: SbpSet1D):
    """Metric terms via SBP differentiation of the coordinate arrays.

    Returns (jac, qx, qy, rx, ry); raises MeshError when the Jacobian is not
    strictly positive (reports the offending node).
    """
    xq = apply_d1(sbp_q, x)
    yq = apply_d1(sbp_q, y)
    xr = apply_d1(sbp_r, x.T).T
    yr = apply_d1(sbp_r, y.T).T
    jac = xq * yr - xr * yq
    if np.min(jac) <= 0.0:
        i, j = np.unravel_index(int(np.argmin(jac)), jac.shape)
        raise MeshError(f"nonpositive Jacobian {jac[i, j]:.3e} at node ({i}, {j}), "
                        f"x={x[i, j]:.4f}, y={y[i, j]:.4f}")
    qx = yr / jac
    qy = -xr / jac
    rx = -yq / jac
    ry = xq / jac
    return jac, qx, qy, rx, ry


def assemble_diffusion_field(block: BlockMesh, kperp: np.ndarray | float,
                             minor_tol: float = 1e-12) -> DiffusionField:
    """Curvilinear coefficient arrays K_q, K_r, K_qr from kappa_perp."""
    kperp = np.broadcast_to(np.asarray(kperp, dtype=float), block.x.shape).copy()
    if np.any(kperp <= 0):
        raise ValueError("kappa_perp must be strictly positive")
    j = block.jac
    kq = j * (block.qx**2 + block.qy**2) * kperp
    kr = j * (block.rx**2 + block.ry**2) * kperp
    kqr = j * (block.qx * block.rx + block.qy * block.ry) * kperp
    minor = kq * kr - kqr**2
    floor = -minor_tol * float(np.max(kq * kr))
    if np.any(kq <= 0) or np.any(kr <= 0) or np.any(minor < floor):
        raise MeshError("diffusion field invariant violated "
                        f"(min Kq={kq.min():.3e}, min Kr={kr.min():.3e}, "
                        f"min minor={minor.min():.3e})")
    return DiffusionField(kperp=kperp, kq=kq, kr=kr, kqr=kqr)


def build_from_mapping(mapping, nq: int, nr: int, order: int) -> BlockMesh:
    """Block from an analytic logical->physical map sampled on a uniform grid."""
    sq = build_sbp_set(order, nq, 1.0 / (nq - 1))
    sr = build_sbp_set(order, nr, 1.0 / (nr - 1))
    qg, rg = np.meshgrid(np.linspace(0, 1, nq), np.linspace(0, 1, nr), indexing="ij")
    x, y = mapping(qg, rg)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    jac, qx, qy, rx, ry = compute_metrics(x, y, sq, sr)
    return BlockMesh(nq=nq, nr=nr, x=x, y=y, jac=jac, qx=qx, qy=qy, rx=rx, ry=ry,
                     dq=1.0 / (nq - 1), dr=1.0 / (nr - 1), mapping=mapping)


def _coons_mapping(c1, c2, c3, c4,
                   q_reparam=None, r_reparam=None):
    """Analytic Coons-patch map with optional monotone reparameterizations."""
    p00 = np.array([float(t) for t in c1(np.array(0.0))])
    p10 = np.array([float(t) for t in c1(np.array(1.0))])
    p01 = np.array([float(t) for t in c3(np.array(0.0))])
    p11 = np.array([float(t) for t in c3(np.array(1.0))])

    def mapping(q, r):
        u = q_reparam(q) if q_reparam is not None else q
        v = r_reparam(r) if r_reparam is not None else r
        s1x, s1y = c1(u)
        s3x, s3y = c3(u)
        s4x, s4y = c4(v)
        s2x, s2y = c2(v)
        x = ((1 - v) * s1x + v * s3x + (1 - u) * s4x + u * s2x
             - ((1 - u) * (1 - v) * p00[0] + u * (1 - v) * p10[0]
                + (1 - u) * v * p01[0] + u * v * p11[0]))
        y = ((1 - v) * s1y + v * s3y + (1 - u) * s4y + u * s2y
             - ((1 - u) * (1 - v) * p00[1] + u * (1 - v) * p10[1]
                + (1 - u) * v * p01[1] + u * v * p11[1]))
        return x, y

    return mapping


def interior_square_curves(gamma: float):
    """Boundary curves of the dilated interior square (corner half-width 0.25)."""
    if not 0.0 <= gamma <= 0.25:
        raise ValueError(f"dilation gamma={gamma} outside [0, 0.25]")
    c1 = BoundaryCurve(lambda t: (-0.25 + 0.5 * t, -0.25 - gamma * t * (1 - t)))
    c2 = BoundaryCurve(lambda t: (0.25 + gamma * t * (1 - t), -0.25 + 0.5 * t))
    c3 = BoundaryCurve(lambda t: (-0.25 + 0.5 * t, 0.25 + gamma * t * (1 - t)))
    c4 = BoundaryCurve(lambda t: (-0.25 - gamma * t * (1 - t), -0.25 + 0.5 * t))
    return c1, c2, c3, c4


def verify_interface_coincidence(blocks: Sequence[BlockMesh],
                                 interfaces: Sequence[Interface]) -> float:
    worst = 0.0
    for itf in interfaces:
        pa = np.stack([face_values(blocks[itf.block_a].x, itf.face_a),
                       face_values(blocks[itf.block_a].y, itf.face_a)], axis=1)
        pb = np.stack([face_values(blocks[itf.block_b].x, itf.face_b),
                       face_values(blocks[itf.block_b].y, itf.face_b)], axis=1)
        if itf.flip:
            pb = pb[::-1]
        worst = max(worst, float(np.max(np.hypot(*(pa - pb).T))))
    return worst


def build_circle_five_block(nq: int, nr: int, gamma: float = 0.0,
                            packing: PackingParams | None = None,
                            order: int = 2) -> MultiBlockDomain:
    """Unit disk split into a dilated interior square and four sectors.

    Block 0 is the interior square (q east, r north).  Blocks 1..4 are the
    east/west/north/south sectors; their radial logical coordinate points
    inward->outward for east/north and outward->inward for west/south so that
    every block keeps a positive Jacobian.
    """
    c1, c2, c3, c4 = interior_square_curves(gamma)

    sq2 = math.sqrt(2.0) / 2.0
    corner = {"se": (-math.pi / 4), "ne": (math.pi / 4),
              "nw": (3 * math.pi / 4), "sw": (5 * math.pi / 4)}
    pse = np.array([sq2, -sq2])
    pne = np.array([sq2, sq2])
    pnw = np.array([-sq2, sq2])
    psw = np.array([-sq2, -sq2])
    sq_se = np.array([0.25, -0.25])
    sq_ne = np.array([0.25, 0.25])
    sq_nw = np.array([-0.25, 0.25])
    sq_sw = np.array([-0.25, -0.25])

    pack_io = None
    if packing is not None:
        # shared in->out packing so the straight diagonal edges stay conforming
        inner_r = 0.25 + gamma / 4.0
        r_s = (packing.r_s if packing.r_s is not None
               else (0.7 - inner_r) / (1.0 - inner_r))
        p_io = PackingParams(alpha_pack=packing.alpha_pack, r_s=r_s)

        def pack_io(s):
            return pack_points(s, p_io)

    def pack_oi(s):
        return 1.0 - pack_io(1.0 - s)

    maps = [_coons_mapping(c1, c2, c3, c4)]

    # east: q radial in->out, r tangential south->north
    maps.append(_coons_mapping(
        line_curve(sq_se, pse),
        arc_curve(corner["se"], corner["ne"]),
        line_curve(sq_ne, pne),
        c2,
        q_reparam=pack_io))
    # west: q radial out->in (circle at q=0), r tangential south->north
    maps.append(_coons_mapping(
        line_curve(psw, sq_sw),
        c4,
        line_curve(pnw, sq_nw),
        arc_curve(corner["sw"], corner["nw"]),
        q_reparam=pack_oi if pack_io is not None else None))
    # north: q tangential west->east, r radial in->out
    maps.append(_coons_mapping(
        c3,
        line_curve(sq_ne, pne),
        arc_curve(corner["nw"], corner["ne"]),
        line_curve(sq_nw, pnw),
        r_reparam=pack_io))
    # south: q tangential west->east, r radial out->in (circle at r=0)
    maps.append(_coons_mapping(
        arc_curve(corner["sw"], corner["se"] + 2.0 * math.pi),
        line_curve(pse, sq_se),
        c1,
        line_curve(psw, sq_sw),
        r_reparam=pack_oi if pack_io is not None else None))

    if pack_io is None:
        maps[1] = _coons_mapping(line_curve(sq_se, pse), arc_curve(corner["se"], corner["ne"]),
                                 line_curve(sq_ne, pne), c2)
        maps[3] = _coons_mapping(c3, line_curve(sq_ne, pne),
                                 arc_curve(corner["nw"], corner["ne"]), line_curve(sq_nw, pnw))

    blocks = tuple(build_from_mapping(m, nq, nr, order) for m in maps)

    interfaces = (
        Interface(0, "q_hi", 1, "q_lo"),
        Interface(2, "q_hi", 0, "q_lo"),
        Interface(0, "r_hi", 3, "r_lo"),
        Interface(4, "r_hi", 0, "r_lo"),
        Interface(1, "r_hi", 3, "q_hi"),              # NE diagonal
        Interface(3, "q_lo", 2, "r_hi", flip=True),   # NW diagonal
        Interface(2, "r_lo", 4, "q_lo"),              # SW diagonal
        Interface(4, "q_hi", 1, "r_lo", flip=True),   # SE diagonal
    )
    exterior = (
        (1, "q_hi", "dirichlet"),
        (2, "q_lo", "dirichlet"),
        (3, "r_hi", "dirichlet"),
        (4, "r_lo", "dirichlet"),
    )

    mismatch = verify_interface_coincidence(blocks, interfaces)
    if mismatch > 1e-10:
        raise MeshError(f"interface coordinate mismatch {mismatch:.3e} exceeds 1e-10")

    sq_ = build_sbp_set(order, nq, 1.0 / (nq - 1))
    sr_ = build_sbp_set(order, nr, 1.0 / (nr - 1))
    return MultiBlockDomain(blocks=blocks, interfaces=interfaces,
                            exterior_boundaries=exterior,
                            sbp_sets=tuple((sq_, sr_) for _ in blocks),
                            order=order)


def build_two_block_cartesian(n: int, order: int = 2) -> MultiBlockDomain:
    """Unit square split at x = 0.5; the simplest interface configuration."""
    left = build_from_mapping(lambda q, r: (0.5 * q, r), n, n, order)
    right = build_from_mapping(lambda q, r: (0.5 + 0.5 * q, r), n, n, order)
    blocks = (left, right)
    interfaces = (Interface(0, "q_hi", 1, "q_lo"),)
    exterior = tuple((b, f, "dirichlet")
                     for b, f in [(0, "q_lo"), (0, "r_lo"), (0, "r_hi"),
                                  (1, "q_hi"), (1, "r_lo"), (1, "r_hi")])
    s = build_sbp_set(order, n, 1.0 / (n - 1))
    return MultiBlockDomain(blocks=blocks, interfaces=interfaces,
                            exterior_boundaries=exterior,
                            sbp_sets=((s, s), (s, s)), order=order)


def build_square_annulus_pair(n: int, gamma: float = 0.1,
                              order: int = 2) -> MultiBlockDomain:
    """Dilated interior square coupled to the east circular sector only."""
    c1, c2, c3, c4 = interior_square_curves(gamma)
    sq2 = math.sqrt(2.0) / 2.0
    inner = build_from_mapping(_coons_mapping(c1, c2, c3, c4), n, n, order)
    east = build_from_mapping(_coons_mapping(
        line_curve((0.25, -0.25), (sq2, -sq2)),
        arc_curve(-math.pi / 4, math.pi / 4),
        line_curve((0.25, 0.25), (sq2, sq2)),
        c2), n, n, order)
    blocks = (inner, east)
    interfaces = (Interface(0, "q_hi", 1, "q_lo"),)
    exterior = tuple((b, f, "dirichlet")
                     for b, f in [(0, "q_lo"), (0, "r_lo"), (0, "r_hi"),
                                  (1, "q_hi"), (1, "r_lo"), (1, "r_hi")])
    s = build_sbp_set(order, n, 1.0 / (n - 1))
    return MultiBlockDomain(blocks=blocks, interfaces=interfaces,
                            exterior_boundaries=exterior,
                            sbp_sets=((s, s), (s, s)), order=order)


def dump_mesh_csv(domain: MultiBlockDomain, path: str) -> None:
    """CSV dump (block, i, j, x, y, J) for the plotting component."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["block", "i", "j", "x", "y", "J"])
        for b, blk in enumerate(domain.blocks):
            for i in range(blk.nq):
                for j in range(blk.nr):
                    w.writerow([b, i, j,
                                repr(float(blk.x[i, j])),
                                repr(float(blk.y[i, j])),
                                repr(float(blk.jac[i, j]))])
