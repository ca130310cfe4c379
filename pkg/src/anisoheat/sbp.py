"""1D summation-by-parts operators with diagonal norms.

Provides the classical diagonal-norm SBP first-derivative operators of
interior order 2 and 4 (Mattsson-style coefficient tables) together with a
fully compatible variable-coefficient second-derivative closure.  The second
derivative is applied through its defining decomposition

    D2(k) u = H^{-1} ( -D1^T H K D1 u - R(k) u + B K D1 u ),

where R(k) is a symmetric positive semi-definite remainder built from
undivided difference operators.  In the interior this reproduces the narrow
variable-coefficient stencils of Mattsson (J Sci Comput 51, 2012); at the
boundary the remainder uses a reflection-symmetric minimal closure, which
keeps the summation-by-parts structure exact (to rounding) for every
positive coefficient vector k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = ["SbpSet1D", "build_sbp_set", "apply_d1", "apply_d2_variable",
           "verify_sbp_identities", "SbpVerification"]


_H_BOUNDARY = {
    2: np.array([0.5]),
    4: np.array([17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0]),
}

_Q_INTERIOR = {
    2: np.array([-0.5, 0.0, 0.5]),
    4: np.array([1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0]),
}

_Q_LEFT = {
    2: np.array([[-0.5, 0.5]]),
    4: np.array([
        [-1.0 / 2.0, 59.0 / 96.0, -1.0 / 12.0, -1.0 / 32.0, 0.0, 0.0],
        [-59.0 / 96.0, 0.0, 59.0 / 96.0, 0.0, 0.0, 0.0],
        [1.0 / 12.0, -59.0 / 96.0, 0.0, 59.0 / 96.0, -1.0 / 12.0, 0.0],
        [1.0 / 32.0, 0.0, -59.0 / 96.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
    ]),
}

_MIN_NODES = {2: 3, 4: 12}


def _rowrange_banded(n: int, stencil: np.ndarray, offset: int,
                     row_lo: int, row_hi: int) -> sp.csr_matrix:
    """Banded matrix carrying `stencil` on rows row_lo..row_hi only.

    Row m holds the stencil at columns m-offset .. m-offset+len-1; rows
    outside the range are zero.
    """
    m = sp.lil_matrix((n, n))
    w = stencil.size
    for i in range(row_lo, row_hi + 1):
        m[i, i - offset:i - offset + w] = stencil
    return m.tocsr()


@dataclass(frozen=True)
class _RemainderPiece:
    """One term of R(k): prefactor * D^T diag(b(k)) D."""

    prefactor: float
    diff: sp.csr_matrix
    b_mode: str  # "node" -> b=k; "neighbor_avg" -> b_i = (k_{i-1}+k_{i+1})/2

    def coefficient(self, k: np.ndarray) -> np.ndarray:
        if self.b_mode == "node":
            return k
        b = np.empty_like(k)
        b[1:-1] = 0.5 * (k[:-2] + k[2:])
        b[0] = k[0]
        b[-1] = k[-1]
        return b


@dataclass(frozen=True)
class SbpSet1D:
    """Immutable family of 1D SBP operators for one grid direction."""

    order: int
    n: int
    dx: float
    h_weights: np.ndarray          # diagonal of H, dx included
    d1: sp.csr_matrix              # H^{-1} Q
    d1_t: sp.csr_matrix            # D1^T, cached for the transpose terms
    remainder: tuple[_RemainderPiece, ...]

    @property
    def hinv(self) -> np.ndarray:
        return 1.0 / self.h_weights


def build_sbp_set(order: int, n: int, dx: float) -> SbpSet1D:
    """Construct the diagonal-norm SBP operator family of a given order.

    Raises ValueError for unsupported orders, node counts below the
    boundary-closure width, or nonpositive spacing.
    """
    if order not in (2, 4):
        raise ValueError(f"unsupported SBP order {order}; choose 2 or 4")
    if n < _MIN_NODES[order]:
        raise ValueError(
            f"order-{order} operators need at least {_MIN_NODES[order]} nodes, got {n}")
    if dx <= 0:
        raise ValueError(f"grid spacing must be positive, got {dx}")

    hb = _H_BOUNDARY[order]
    h = np.ones(n)
    h[:hb.size] = hb
    h[-hb.size:] = hb[::-1]
    h *= dx

    qi = _Q_INTERIOR[order]
    ql = _Q_LEFT[order]
    qr = -ql[::-1, ::-1]
    q = sp.lil_matrix((n, n))
    w = qi.size
    for i in range(n):
        lo = i - w // 2
        if 0 <= lo and lo + w <= n:
            q[i, lo:lo + w] = qi
    q[:ql.shape[0], :] = 0.0
    q[:ql.shape[0], :ql.shape[1]] = ql
    q[-qr.shape[0]:, :] = 0.0
    q[-qr.shape[0]:, -qr.shape[1]:] = qr
    q = q.tocsr()
    d1 = sp.diags(1.0 / h) @ q

    if order == 2:
        d2s = _rowrange_banded(n, np.array([1.0, -2.0, 1.0]) / dx**2, 1, 1, n - 2)
        pieces = (_RemainderPiece(dx**3 / 4.0, d2s, "node"),)
    else:
        s3 = np.array([-1.0, 3.0, -3.0, 1.0]) / dx**3
        # Third-difference rows in both anchorings, half weight each, so the
        # remainder is exactly reflection symmetric despite the even stencil.
        d3a = _rowrange_banded(n, s3, 2, 2, n - 2)
        d3b = _rowrange_banded(n, s3, 1, 1, n - 3)
        s4 = np.array([1.0, -4.0, 6.0, -4.0, 1.0]) / dx**4
        d4 = _rowrange_banded(n, s4, 2, 2, n - 3)
        pieces = (
            _RemainderPiece(dx**5 / 36.0, d3a, "neighbor_avg"),
            _RemainderPiece(dx**5 / 36.0, d3b, "neighbor_avg"),
            _RemainderPiece(dx**7 / 144.0, d4, "node"),
        )

    return SbpSet1D(order=order, n=n, dx=dx, h_weights=h,
                    d1=d1, d1_t=sp.csr_matrix(d1.T), remainder=pieces)


def apply_d1(sbp: SbpSet1D, u: np.ndarray) -> np.ndarray:
    """Apply D1 along the leading axis of u (shape (n,) or (n, m))."""
    if u.shape[0] != sbp.n:
        raise ValueError(f"expected leading dimension {sbp.n}, got {u.shape[0]}")
    return sbp.d1 @ u


def _scale_rows(weights: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Multiply row i of u by weights[i]; weights may be 1D or shaped like u."""
    if weights.ndim == u.ndim:
        return weights * u
    return weights[:, None] * u if u.ndim == 2 else weights * u


def apply_remainder(sbp: SbpSet1D, k: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Apply the symmetric PSD remainder R(k) along the leading axis.

    k may be a vector (shared across columns) or an array shaped like u
    (per-column coefficients).
    """
    out = np.zeros_like(u, dtype=float)
    for piece in sbp.remainder:
        v = piece.diff @ u
        v = _scale_rows(piece.coefficient(k), v)
        out += piece.prefactor * (piece.diff.T @ v)
    return out


def apply_d2_variable(sbp: SbpSet1D, k: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Fully compatible variable-coefficient second derivative.

    Evaluates H^{-1}(-M(k) + B K D1)u with M(k) = D1^T H K D1 + R(k),
    column-wise along the leading axis.  k must be strictly positive and
    shaped either (n,) or like u.
    """
    k = np.asarray(k, dtype=float)
    u = np.asarray(u, dtype=float)
    if k.shape[0] != sbp.n or u.shape[0] != sbp.n:
        raise ValueError("coefficient/vector length mismatch with operator size")
    if np.any(k <= 0):
        raise ValueError("diffusion coefficient must be strictly positive")

    du = sbp.d1 @ u
    kdu = _scale_rows(k, du)
    out = -(sbp.d1_t @ _scale_rows(sbp.h_weights, kdu))
    out -= apply_remainder(sbp, k, u)
    # B K D1 term: boundary fluxes on the first and last rows only.
    out[0] -= kdu[0]
    out[-1] += kdu[-1]
    return _scale_rows(sbp.hinv, out)


@dataclass(frozen=True)
class SbpVerification:
    """Dense verification of the defining SBP identities."""

    q_defect: float           # max |Q + Q^T - B|
    r_symmetry_defect: float  # max |R - R^T|
    r_eigmin: float
    r_norm: float             # spectral norm of R
    passed: bool

    def as_text(self) -> str:
        rows = [
            ("max|Q+Q^T-B|", self.q_defect),
            ("max|R-R^T|", self.r_symmetry_defect),
            ("eigmin(R)", self.r_eigmin),
            ("||R||_2", self.r_norm),
        ]
        body = "\n".join(f"{name:<16} {val: .6e}" for name, val in rows)
        return body + f"\npassed           {self.passed}"


def dense_d1(sbp: SbpSet1D) -> np.ndarray:
    return sbp.d1.toarray()


def dense_remainder(sbp: SbpSet1D, k: np.ndarray) -> np.ndarray:
    """Dense R(k); audit path only."""
    r = np.zeros((sbp.n, sbp.n))
    k = np.asarray(k, dtype=float)
    for piece in sbp.remainder:
        d = piece.diff.toarray()
        r += piece.prefactor * d.T @ np.diag(piece.coefficient(k)) @ d
    return r


def dense_d2(sbp: SbpSet1D, k: np.ndarray) -> np.ndarray:
    """Dense variable-coefficient D2; audit path only."""
    k = np.asarray(k, dtype=float)
    d1 = dense_d1(sbp)
    h = np.diag(sbp.h_weights)
    m = d1.T @ h @ np.diag(k) @ d1 + dense_remainder(sbp, k)
    bkd = np.zeros((sbp.n, sbp.n))
    bkd[0] = -k[0] * d1[0]
    bkd[-1] = k[-1] * d1[-1]
    return np.diag(sbp.hinv) @ (-m + bkd)


def verify_sbp_identities(sbp: SbpSet1D, k: np.ndarray,
                          defect_tol: float = 1e-12,
                          eig_floor: float = 1e-10) -> SbpVerification:
    """Check Q+Q^T=B and symmetry/semi-definiteness of R(k) densely.

    The report never raises; failures are carried in `passed`.
    """
    k = np.asarray(k, dtype=float)
    d1 = dense_d1(sbp)
    q = np.diag(sbp.h_weights) @ d1
    b = np.zeros((sbp.n, sbp.n))
    b[0, 0] = -1.0
    b[-1, -1] = 1.0
    q_defect = float(np.max(np.abs(q + q.T - b)))

    r = dense_remainder(sbp, k)
    r_sym = float(np.max(np.abs(r - r.T)))
    eigs = np.linalg.eigvalsh(0.5 * (r + r.T))
    r_eigmin = float(eigs[0])
    r_norm = float(np.max(np.abs(eigs)))

    passed = (q_defect < defect_tol and r_sym < defect_tol
              and r_eigmin >= -eig_floor * max(r_norm, 1e-300))
    return SbpVerification(q_defect=q_defect, r_symmetry_defect=r_sym,
                           r_eigmin=r_eigmin, r_norm=r_norm, passed=passed)
