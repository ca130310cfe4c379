"""Curvilinear perpendicular diffusion operator with SAT couplings.

Assembles the multi-block operator

    P u = J^{-1} ( D_perp u + SAT_dirichlet(u - g) + SAT_interface(u) )

where D_perp is the variable-coefficient SBP divergence form and the SATs
weakly enforce Dirichlet data and interface continuity.  The penalty values
follow the sharp energy bounds: the H-weighted operator H J P is symmetric
negative semi-definite, which the dense audit paths verify eigenvalue-wise.

Sign conventions: writing the boundary terms of the energy rate as
u^T H J P u = interior_negative - sum over faces of (H_t-weighted) quadratic
forms, the Dirichlet forms reduce by congruence to

    A_n = [[tau_n0, K_n, K_nt], [K_n, K_n, K_nt], [K_nt, K_nt, K_t]]

(positive semi-definite iff tau_n0 >= K_n at the face node) and the interface
forms to the 5x5 coupling matrix whose Schur complement requires

    tau_I0 >= 1/4 (K_n^a / H_n^a + K_n^b / H_n^b)

per matched interface node.  compute_penalties applies these bounds with a
small safety factor.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .mesh import (FACE_AXIS, FACE_END, DiffusionField, Interface,
                   MultiBlockDomain, face_values)
from .sbp import SbpSet1D, apply_d2_variable, dense_d1, dense_d2

__all__ = ["PenaltySet", "PerpOperator", "compute_penalties",
           "assemble_dense", "check_energy_stability", "StabilityReport",
           "audit_lemma_matrices", "LemmaAuditReport"]

SAFETY = 1.0 + 1e-8


def _face_sigma(face: str) -> float:
    return 1.0 if FACE_END[face] == -1 else -1.0


@dataclass(frozen=True)
class _FaceOps:
    """Cached face-local data for one side of a boundary or interface."""

    block: int
    face: str
    axis: int                 # 0: q-face, 1: r-face
    sigma: float
    h_n_face: float           # 1D norm weight at the face, normal direction
    h_t: np.ndarray           # tangential 1D norm weights
    k_n: np.ndarray           # normal coefficient along the face
    k_nt: np.ndarray          # cross coefficient along the face
    k_t: np.ndarray           # tangential coefficient along the face
    d1_face_row: np.ndarray   # face row of the normal-direction D1
    sbp_t: SbpSet1D


def _make_face_ops(domain: MultiBlockDomain, fields: list[DiffusionField],
                   block: int, face: str) -> _FaceOps:
    blk = domain.blocks[block]
    sq, sr = domain.sbp_sets[block]
    fld = fields[block]
    axis = FACE_AXIS[face]
    end = FACE_END[face]
    if axis == 0:
        sbp_n, sbp_t = sq, sr
        k_n = face_values(fld.kq, face)
        k_t = face_values(fld.kr, face)
    else:
        sbp_n, sbp_t = sr, sq
        k_n = face_values(fld.kr, face)
        k_t = face_values(fld.kq, face)
    row = sbp_n.d1[end if end >= 0 else sbp_n.n - 1].toarray().ravel()
    return _FaceOps(block=block, face=face, axis=axis, sigma=_face_sigma(face),
                    h_n_face=float(sbp_n.h_weights[end]), h_t=sbp_t.h_weights,
                    k_n=k_n, k_nt=face_values(fld.kqr, face), k_t=k_t,
                    d1_face_row=row, sbp_t=sbp_t)


def _normal_derivative_at_face(ops: _FaceOps, u: np.ndarray) -> np.ndarray:
    if ops.axis == 0:
        return ops.d1_face_row @ u
    return u @ ops.d1_face_row


def _tangential_derivative_at_face(ops: _FaceOps, u: np.ndarray) -> np.ndarray:
    return ops.sbp_t.d1 @ face_values(u, ops.face)


def _conormal_flux(ops: _FaceOps, u: np.ndarray) -> np.ndarray:
    """(K_n D_n + K_nt D_t) u restricted to the face line."""
    return (ops.k_n * _normal_derivative_at_face(ops, u)
            + ops.k_nt * _tangential_derivative_at_face(ops, u))


def _add_transpose_flux(out: np.ndarray, ops: _FaceOps, w: np.ndarray,
                        h2d: np.ndarray, coeff: float) -> None:
    """out += coeff * H^{-1} (K_n D_n + K_nt D_t)^T (e_face x w) for one block."""
    end = FACE_END[ops.face]
    if ops.axis == 0:
        out += coeff * np.outer(ops.d1_face_row, ops.k_n * w) / h2d
        out[end, :] += coeff * (ops.sbp_t.d1_t @ (ops.k_nt * w)) / h2d[end, :]
    else:
        out += coeff * np.outer(ops.k_n * w, ops.d1_face_row) / h2d
        out[:, end] += coeff * (ops.sbp_t.d1_t @ (ops.k_nt * w)) / h2d[:, end]


@dataclass(frozen=True)
class PenaltySet:
    """Penalty parameters guaranteeing energy stability.

    dirichlet_tau0 maps (block, face) to the zeroth-order Dirichlet penalty;
    interface_tau0 maps the interface index to a per-node array on the a-side
    tangential indexing.  The first-order penalties are fixed by symmetry.
    """

    dirichlet_tau0: dict[tuple[int, str], float]
    interface_tau0: dict[int, np.ndarray]
    tau_q1: float = -1.0
    tau_r1: float = -1.0
    tau_i1: float = 0.5
    tau_i2: float = -0.5

    def scaled(self, factor: float) -> "PenaltySet":
        return PenaltySet(
            dirichlet_tau0={k: factor * v for k, v in self.dirichlet_tau0.items()},
            interface_tau0={k: factor * v for k, v in self.interface_tau0.items()},
            tau_q1=self.tau_q1, tau_r1=self.tau_r1,
            tau_i1=self.tau_i1, tau_i2=self.tau_i2)


def compute_penalties(domain: MultiBlockDomain,
                      fields: list[DiffusionField],
                      safety: float = SAFETY) -> PenaltySet:
    """Sharp stability penalties with a small safety factor.

    Dirichlet: tau_0 = safety * max(K_n) over the face.  Interface:
    tau_I0 = safety/4 * (K_n^a/H_n^a + K_n^b/H_n^b) per matched node; the
    appendix Schur complement requires the sum of both side ratios.
    """
    dirichlet = {}
    for block, face, _tag in domain.exterior_boundaries:
        ops = _make_face_ops(domain, fields, block, face)
        corner = np.ones_like(ops.k_n)
        corner[0] = corner[-1] = 2.0
        dirichlet[(block, face)] = safety * float(np.max(corner * ops.k_n))
    interface = {}
    for idx, itf in enumerate(domain.interfaces):
        a = _make_face_ops(domain, fields, itf.block_a, itf.face_a)
        b = _make_face_ops(domain, fields, itf.block_b, itf.face_b)
        kb = b.k_n[::-1] if itf.flip else b.k_n
        tau = safety * 0.25 * (a.k_n / a.h_n_face + kb / b.h_n_face)
        # face-endpoint nodes: a second SAT face borrows the same interior
        # energy there, leaving each face only half the diagonal to lean on
        tau[0] *= 2.0
        tau[-1] *= 2.0
        interface[idx] = tau
    return PenaltySet(dirichlet_tau0=dirichlet, interface_tau0=interface)


class PerpOperator:
    """Matrix-free multi-block perpendicular diffusion operator."""

    def __init__(self, domain: MultiBlockDomain, fields: list[DiffusionField],
                 penalties: PenaltySet | None = None):
        if len(fields) != domain.n_blocks:
            raise ValueError("one DiffusionField required per block")
        self.domain = domain
        self.fields = fields
        self.penalties = penalties if penalties is not None \
            else compute_penalties(domain, fields)
        self.offsets = domain.block_offsets()
        self.n_total = domain.total_nodes

        self._h2d = []      # logical 2D norm weights per block (hq_i * hr_j)
        self._hj = []       # J-weighted norm (the physical inner product)
        for b, blk in enumerate(domain.blocks):
            sq, sr = domain.sbp_sets[b]
            h2 = np.outer(sq.h_weights, sr.h_weights)
            self._h2d.append(h2)
            self._hj.append(h2 * blk.jac)

        self._dirichlet_ops = {(b, f): _make_face_ops(domain, fields, b, f)
                               for b, f, _ in domain.exterior_boundaries}
        self._interface_ops = [( _make_face_ops(domain, fields, itf.block_a, itf.face_a),
                                 _make_face_ops(domain, fields, itf.block_b, itf.face_b))
                               for itf in domain.interfaces]

    # -- layout helpers ------------------------------------------------
    def split(self, u: np.ndarray) -> list[np.ndarray]:
        """Views of the flat vector as per-block (nq, nr) arrays."""
        return [u[self.offsets[b]:self.offsets[b + 1]].reshape(blk.shape)
                for b, blk in enumerate(self.domain.blocks)]

    def h_diag(self) -> np.ndarray:
        """Bare logical H diagonal (no Jacobian)."""
        return np.concatenate([h.ravel() for h in self._h2d])

    def hj_diag(self) -> np.ndarray:
        """Jacobian-weighted H diagonal, the physical L2 inner product."""
        return np.concatenate([h.ravel() for h in self._hj])

    # -- operator pieces -----------------------------------------------
    def apply_dperp_block(self, b: int, u: np.ndarray) -> np.ndarray:
        """Interior divergence-form operator on one block (no SATs, no 1/J)."""
        sq, sr = self.domain.sbp_sets[b]
        fld = self.fields[b]
        if u.shape != self.domain.blocks[b].shape:
            raise ValueError(f"block {b}: expected shape "
                             f"{self.domain.blocks[b].shape}, got {u.shape}")
        out = apply_d2_variable(sq, fld.kq, u)
        out += apply_d2_variable(sr, fld.kr.T, u.T).T
        dq_u = sq.d1 @ u
        out += (sr.d1 @ (fld.kqr * dq_u).T).T
        dr_u = (sr.d1 @ u.T).T
        out += sq.d1 @ (fld.kqr * dr_u)
        return out

    def _add_dirichlet_sats(self, outs: list[np.ndarray], us: list[np.ndarray],
                            g: dict[tuple[int, str], np.ndarray] | None) -> None:
        for (b, face), ops in self._dirichlet_ops.items():
            u = us[b]
            diff = face_values(u, face).copy()
            if g is not None and (b, face) in g:
                diff -= g[(b, face)]
            tau0 = self.penalties.dirichlet_tau0[(b, face)]
            out = outs[b]
            end = FACE_END[face]
            pen = -tau0 * diff / ops.h_n_face**2
            if ops.axis == 0:
                out[end, :] += pen
            else:
                out[:, end] += pen
            w = ops.sigma * ops.h_t * diff
            _add_transpose_flux(out, ops, w, self._h2d[b], 1.0)

    def _add_interface_sats(self, outs: list[np.ndarray],
                            us: list[np.ndarray]) -> None:
        for idx, itf in enumerate(self.domain.interfaces):
            a, b = self._interface_ops[idx]
            ua, ub = us[a.block], us[b.block]
            fa = face_values(ua, a.face)
            fb = face_values(ub, b.face)
            phi_a = a.sigma * _conormal_flux(a, ua)
            phi_b = b.sigma * _conormal_flux(b, ub)
            if itf.flip:
                jump = fa - fb[::-1]
                flux_sum = phi_a + phi_b[::-1]
            else:
                jump = fa - fb
                flux_sum = phi_a + phi_b
            tau0 = self.penalties.interface_tau0[idx]

            pen_a = (-tau0 * jump - 0.5 * flux_sum) / a.h_n_face
            jump_b = -(jump[::-1] if itf.flip else jump)
            flux_b = flux_sum[::-1] if itf.flip else flux_sum
            pen_b = (-tau0[::-1] if itf.flip else -tau0) * jump_b / b.h_n_face \
                - 0.5 * flux_b / b.h_n_face

            end_a, end_b = FACE_END[a.face], FACE_END[b.face]
            if a.axis == 0:
                outs[a.block][end_a, :] += pen_a
            else:
                outs[a.block][:, end_a] += pen_a
            if b.axis == 0:
                outs[b.block][end_b, :] += pen_b
            else:
                outs[b.block][:, end_b] += pen_b

            # dual terms: coefficients +sigma/2 on the a side, -sigma/2 on the
            # b side, acting on the jump (u_a - u_b) in each side's indexing
            _add_transpose_flux(outs[a.block], a, a.sigma * 0.5 * a.h_t * jump,
                                self._h2d[a.block], 1.0)
            _add_transpose_flux(outs[b.block], b, b.sigma * 0.5 * b.h_t * jump_b,
                                self._h2d[b.block], 1.0)

    def apply(self, u: np.ndarray,
              g: dict[tuple[int, str], np.ndarray] | None = None) -> np.ndarray:
        """Full operator P(u; g) = J^{-1}(D_perp u + SATs); flat in, flat out."""
        us = self.split(np.asarray(u, dtype=float))
        outs = [self.apply_dperp_block(b, us[b])
                for b in range(self.domain.n_blocks)]
        self._add_dirichlet_sats(outs, us, g)
        self._add_interface_sats(outs, us)
        return np.concatenate([
            (outs[b] / self.domain.blocks[b].jac).ravel()
            for b in range(self.domain.n_blocks)])

    def apply_linear(self, u: np.ndarray) -> np.ndarray:
        """Homogeneous part (g = 0)."""
        return self.apply(u, g=None)

    def g_contribution(self, g: dict[tuple[int, str], np.ndarray]) -> np.ndarray:
        """Affine boundary-data part: P(u; g) = apply_linear(u) + g_contribution(g)."""
        zero = np.zeros(self.n_total)
        return self.apply(zero, g=g)


# -- dense audit paths ---------------------------------------------------

def assemble_dense(op: PerpOperator, cap: int = 5000) -> np.ndarray:
    """Dense matrix of the homogeneous operator, built independently.

    Uses Kronecker products of dense 1D operators and explicit SAT formulas
    rather than the matrix-free composition; intended for audits only.
    """
    n = op.n_total
    if n > cap:
        raise ValueError(f"dense assembly capped at {cap} unknowns, need {n}")
    dom = op.domain
    offs = op.offsets
    p = np.zeros((n, n))

    # interior divergence form, block by block
    for b, blk in enumerate(dom.blocks):
        sq, sr = dom.sbp_sets[b]
        fld = op.fields[b]
        nq, nr = blk.shape
        iq, ir = np.eye(nq), np.eye(nr)
        d1q, d1r = dense_d1(sq), dense_d1(sr)
        blockmat = np.zeros((blk.size, blk.size))
        for j in range(nr):
            d2 = dense_d2(sq, fld.kq[:, j])
            sel = np.zeros((nr, nr))
            sel[j, j] = 1.0
            blockmat += np.kron(d2, sel)
        for i in range(nq):
            d2 = dense_d2(sr, fld.kr[i, :])
            sel = np.zeros((nq, nq))
            sel[i, i] = 1.0
            blockmat += np.kron(sel, d2)
        dq = np.kron(d1q, ir)
        dr = np.kron(iq, d1r)
        kqr = np.diag(fld.kqr.ravel())
        blockmat += dr @ kqr @ dq + dq @ kqr @ dr
        sl = slice(offs[b], offs[b + 1])
        p[sl, sl] += blockmat

    # Dirichlet SATs
    for (b, face), ops in op._dirichlet_ops.items():
        blk = dom.blocks[b]
        nq, nr = blk.shape
        sl = slice(offs[b], offs[b + 1])
        sel = _dense_face_selector(nq, nr, face)          # (m, size) extractor
        tau0 = op.penalties.dirichlet_tau0[(b, face)]
        p[sl, sl] += sel.T @ (np.diag(-tau0 / ops.h_n_face**2 * np.ones(sel.shape[0]))) @ sel
        flux = _dense_flux_rows(dom, op.fields[b], b, face)   # (m, size)
        h2 = op._h2d[b].ravel()
        p[sl, sl] += (flux.T * (1.0 / h2)[:, None]) @ np.diag(ops.sigma * ops.h_t) @ sel

    # interface SATs
    for idx, itf in enumerate(dom.interfaces):
        a, bops = op._interface_ops[idx]
        ba, bb = itf.block_a, itf.block_b
        sla, slb = slice(offs[ba], offs[ba + 1]), slice(offs[bb], offs[bb + 1])
        nqa, nra = dom.blocks[ba].shape
        nqb, nrb = dom.blocks[bb].shape
        sel_a = _dense_face_selector(nqa, nra, itf.face_a)
        sel_b = _dense_face_selector(nqb, nrb, itf.face_b)
        if itf.flip:
            sel_b = sel_b[::-1]
        m = sel_a.shape[0]
        flux_a = a.sigma * _dense_flux_rows(dom, op.fields[ba], ba, itf.face_a)
        flux_b_own = _dense_flux_rows(dom, op.fields[bb], bb, itf.face_b)
        flux_b = bops.sigma * (flux_b_own[::-1] if itf.flip else flux_b_own)
        tau0 = op.penalties.interface_tau0[idx]

        # zeroth order + flux average rows on each face
        p[sla, sla] += sel_a.T @ np.diag(-tau0 / a.h_n_face) @ sel_a
        p[sla, slb] += sel_a.T @ np.diag(tau0 / a.h_n_face) @ sel_b
        p[slb, slb] += sel_b.T @ np.diag(-tau0 / bops.h_n_face) @ sel_b
        p[slb, sla] += sel_b.T @ np.diag(tau0 / bops.h_n_face) @ sel_a

        p[sla, sla] += sel_a.T @ (-0.5 / a.h_n_face * flux_a)
        p[sla, slb] += sel_a.T @ (-0.5 / a.h_n_face * flux_b)
        p[slb, slb] += sel_b.T @ (-0.5 / bops.h_n_face * flux_b)
        p[slb, sla] += sel_b.T @ (-0.5 / bops.h_n_face * flux_a)

        # transpose (dual) terms: +sigma/2 (a side) and -sigma/2 (b side) on
        # the jump (u_a - u_b) expressed in each side's own indexing
        h2a = op._h2d[ba].ravel()
        h2b = op._h2d[bb].ravel()
        unsigned_a = flux_a / a.sigma
        wa = np.diag(a.sigma * 0.5 * a.h_t)
        p[sla, sla] += (unsigned_a.T * (1.0 / h2a)[:, None]) @ wa @ sel_a
        p[sla, slb] += (unsigned_a.T * (1.0 / h2a)[:, None]) @ wa @ (-sel_b)
        wb = np.diag(-bops.sigma * 0.5 * bops.h_t)
        sel_b_own = _dense_face_selector(nqb, nrb, itf.face_b)
        sel_a_on_b = sel_a[::-1] if itf.flip else sel_a
        p[slb, slb] += (flux_b_own.T * (1.0 / h2b)[:, None]) @ wb @ (-sel_b_own)
        p[slb, sla] += (flux_b_own.T * (1.0 / h2b)[:, None]) @ wb @ sel_a_on_b

    jinv = np.concatenate([(1.0 / blk.jac).ravel() for blk in dom.blocks])
    return jinv[:, None] * p


def _dense_face_selector(nq: int, nr: int, face: str) -> np.ndarray:
    """(m, nq*nr) matrix extracting the face line of the flattened block."""
    size = nq * nr
    if FACE_AXIS[face] == 0:
        i = 0 if FACE_END[face] == 0 else nq - 1
        m = nr
        sel = np.zeros((m, size))
        for j in range(nr):
            sel[j, i * nr + j] = 1.0
    else:
        j = 0 if FACE_END[face] == 0 else nr - 1
        m = nq
        sel = np.zeros((m, size))
        for i in range(nq):
            sel[i, i * nr + j] = 1.0
    return sel


def _dense_flux_rows(dom: MultiBlockDomain, fld: DiffusionField,
                     b: int, face: str) -> np.ndarray:
    """(m, size) dense rows of the unsigned conormal flux at a face."""
    blk = dom.blocks[b]
    sq, sr = dom.sbp_sets[b]
    nq, nr = blk.shape
    d1q, d1r = dense_d1(sq), dense_d1(sr)
    dq = np.kron(d1q, np.eye(nr))
    dr = np.kron(np.eye(nq), d1r)
    sel = _dense_face_selector(nq, nr, face)
    if FACE_AXIS[face] == 0:
        k_n = face_values(fld.kq, face)
        normal = dq
        tang = dr
    else:
        k_n = face_values(fld.kr, face)
        normal = dr
        tang = dq
    k_nt = face_values(fld.kqr, face)
    return np.diag(k_n) @ sel @ normal + np.diag(k_nt) @ sel @ tang


@dataclass(frozen=True)
class StabilityReport:
    config: str
    n_unknowns: int
    symmetry_defect: float
    eigmax: float
    s_norm: float
    passed: bool

    def row(self) -> list:
        return [self.config, self.n_unknowns, repr(self.symmetry_defect),
                repr(self.eigmax), repr(self.s_norm), self.passed]


def check_energy_stability(op: PerpOperator, config: str = "",
                           tol: float = 1e-10) -> StabilityReport:
    """Dense eigenvalue audit of S = HJP + (HJP)^T (Jacobian-weighted norm)."""
    p = assemble_dense(op)
    hj = op.hj_diag()
    hp = hj[:, None] * p
    defect = float(np.max(np.abs(hp - hp.T)))
    s = hp + hp.T
    eigs = np.linalg.eigvalsh(0.5 * (s + s.T))
    eigmax = float(eigs[-1])
    s_norm = float(np.max(np.abs(eigs)))
    passed = eigmax <= tol * max(s_norm, 1e-300)
    return StabilityReport(config=config, n_unknowns=op.n_total,
                           symmetry_defect=defect, eigmax=eigmax,
                           s_norm=s_norm, passed=passed)


@dataclass(frozen=True)
class LemmaAuditReport:
    """PSD status of every boundary 3x3 and interface 5x5 coupling matrix."""

    config: str
    n_boundary: int
    n_interface: int
    boundary_eigmin: float
    interface_eigmin: float
    max_symmetry_defect: float
    passed: bool
    failures: tuple = field(default_factory=tuple)

    def row(self) -> list:
        return [self.config, self.n_boundary, self.n_interface,
                repr(self.boundary_eigmin), repr(self.interface_eigmin),
                self.passed]


def audit_lemma_matrices(op: PerpOperator, config: str = "",
                         eig_floor: float = 1e-12) -> LemmaAuditReport:
    """Construct A_n at every exterior node and G at every interface node."""
    bound_min = np.inf
    iface_min = np.inf
    sym_max = 0.0
    failures = []
    n_b = 0
    for (b, face), ops in op._dirichlet_ops.items():
        tau0 = op.penalties.dirichlet_tau0[(b, face)]
        for i in range(ops.k_n.size):
            a_mat = np.array([
                [tau0, ops.k_n[i], ops.k_nt[i]],
                [ops.k_n[i], ops.k_n[i], ops.k_nt[i]],
                [ops.k_nt[i], ops.k_nt[i], ops.k_t[i]],
            ])
            eig = np.linalg.eigvalsh(a_mat)
            scale = max(np.max(np.abs(eig)), 1e-300)
            bound_min = min(bound_min, eig[0] / scale)
            if eig[0] < -eig_floor * scale:
                failures.append(("dirichlet", b, face, i, float(eig[0])))
            n_b += 1
    n_i = 0
    for idx, itf in enumerate(op.domain.interfaces):
        a, bops = op._interface_ops[idx]
        tau0 = op.penalties.interface_tau0[idx]
        kb_n = bops.k_n[::-1] if itf.flip else bops.k_n
        kb_nt = bops.k_nt[::-1] if itf.flip else bops.k_nt
        kb_t = bops.k_t[::-1] if itf.flip else bops.k_t
        for i in range(tau0.size):
            ha, hb = a.h_n_face, bops.h_n_face
            g_mat = np.array([
                [tau0[i], 0.5 * a.k_n[i], 0.5 * kb_n[i],
                 0.5 * a.k_nt[i], 0.5 * kb_nt[i]],
                [0.5 * a.k_n[i], ha * a.k_n[i], 0.0, ha * a.k_nt[i], 0.0],
                [0.5 * kb_n[i], 0.0, hb * kb_n[i], 0.0, hb * kb_nt[i]],
                [0.5 * a.k_nt[i], ha * a.k_nt[i], 0.0, ha * a.k_t[i], 0.0],
                [0.5 * kb_nt[i], 0.0, hb * kb_nt[i], 0.0, hb * kb_t[i]],
            ])
            sym_max = max(sym_max, float(np.max(np.abs(g_mat - g_mat.T))))
            eig = np.linalg.eigvalsh(g_mat)
            scale = max(np.max(np.abs(eig)), 1e-300)
            iface_min = min(iface_min, eig[0] / scale)
            if eig[0] < -eig_floor * scale:
                failures.append(("interface", idx, i, float(eig[0])))
            n_i += 1
    passed = not failures
    return LemmaAuditReport(config=config, n_boundary=n_b, n_interface=n_i,
                            boundary_eigmin=float(bound_min),
                            interface_eigmin=float(iface_min),
                            max_symmetry_defect=sym_max,
                            passed=passed, failures=tuple(failures))


def write_stability_csv(reports: list[StabilityReport], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["config", "n_unknowns", "symmetry_defect", "eigmax",
                    "s_norm", "pass"])
        for r in reports:
            w.writerow(r.row())
