"""Element integrals, global banded operators and the banded direct solver.

On a uniform mesh every element [x_m, x_{m+1}] sees the same four shape
functions (the overlapping pieces of B_{m-1}..B_{m+2}), so the 4x4
element matrices are computed once by Gauss-Legendre quadrature and
scattered along the diagonal.  The resulting global operators are
septa-diagonal (3 sub- + 3 super-diagonals) and are stored diagonal-major
in the usual band layout ab[ku + i - j, j] = M[i, j].

The banded systems are solved by LU factorization without pivoting (the
natural bandwidth-3 generalization of the Thomas algorithm) with a
pivot-magnitude guard; kernels are numba-compiled.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .basis import cosh_minus_one, sinh_minus

__all__ = [
    "SingularSystemError",
    "ElementMatrices",
    "BandMatrix",
    "BandedSystem",
    "element_matrices",
    "assemble_global",
    "apply_nonlinear",
    "band_matvec",
    "band_solve",
]

PIVOT_RTOL = 1e-14


class SingularSystemError(ArithmeticError):
    """Zero or near-zero pivot met during banded elimination."""

    def __init__(self, message, t=None):
        if t is not None:
            message = f"{message} (at t={t:g})"
        super().__init__(message)
        self.t = t


@dataclass(frozen=True)
class ElementMatrices:
    """4x4 blocks of basis-product integrals over one element.

    A[j,i] = int B_j B_i, B[j,i] = int B_j B_i', D[j,i] = int B_j B_i'',
    C[j,k,i] = int B_j B_k B_i'.  Local index 0..3 maps to global basis
    m-1..m+2 on element m.
    """

    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    C: np.ndarray
    quad_order: int


def shape_values(basis, xi):
    """Values, first and second derivatives of the four element shape
    functions at local coordinates xi in [0, h].

    Returns three (len(xi), 4) arrays.
    """
    xi = np.asarray(xi, dtype=float)
    p, h = basis.p, basis.h
    den2 = 2.0 * basis.denom
    s1, dd = basis.s1, basis.dd
    eta = h - xi

    V = np.empty(xi.shape + (4,))
    V1 = np.empty_like(V)
    V2 = np.empty_like(V)

    # outer pieces: B_{m-1} decays to the right, B_{m+2} grows from the left
    V[..., 0] = sinh_minus(p * eta) / den2
    V1[..., 0] = -p * cosh_minus_one(p * eta) / den2
    V2[..., 0] = p * p * np.sinh(p * eta) / den2
    V[..., 3] = sinh_minus(p * xi) / den2
    V1[..., 3] = p * cosh_minus_one(p * xi) / den2
    V2[..., 3] = p * p * np.sinh(p * xi) / den2

    # inner pieces: B_m falls from its center at xi=0, B_{m+1} mirrored
    V[..., 1] = 1.0 + s1 * cosh_minus_one(p * xi) + dd * sinh_minus(p * xi)
    V1[..., 1] = p * (s1 * np.sinh(p * xi) + dd * cosh_minus_one(p * xi))
    V2[..., 1] = p * p * (s1 * np.cosh(p * xi) + dd * np.sinh(p * xi))
    V[..., 2] = 1.0 + s1 * cosh_minus_one(p * eta) + dd * sinh_minus(p * eta)
    V1[..., 2] = -p * (s1 * np.sinh(p * eta) + dd * cosh_minus_one(p * eta))
    V2[..., 2] = p * p * (s1 * np.cosh(p * eta) + dd * np.sinh(p * eta))
    return V, V1, V2


def element_matrices(basis, quad_order=8):
    """Gauss-Legendre element integrals; identical for every element."""
    quad_order = int(quad_order)
    if quad_order < 4:
        raise ValueError(f"quadrature order must be >= 4, got {quad_order}")
    nodes, weights = np.polynomial.legendre.leggauss(quad_order)
    h = basis.h
    xi = 0.5 * h * (nodes + 1.0)
    w = 0.5 * h * weights
    V, V1, V2 = shape_values(basis, xi)
    A = np.einsum("qj,qi,q->ji", V, V, w)
    B = np.einsum("qj,qi,q->ji", V, V1, w)
    D = np.einsum("qj,qi,q->ji", V, V2, w)
    C = np.einsum("qj,qk,qi,q->jki", V, V, V1, w)
    return ElementMatrices(A=A, B=B, D=D, C=C, quad_order=quad_order)


@dataclass
class BandMatrix:
    """Diagonal-major band storage: data[ku + i - j, j] = M[i, j]."""

    data: np.ndarray
    kl: int
    ku: int

    @property
    def n(self):
        return self.data.shape[1]

    def copy(self):
        return BandMatrix(self.data.copy(), self.kl, self.ku)

    def matvec(self, x):
        return band_matvec(self.data, self.kl, self.ku, x)

    def to_dense(self):
        n = self.n
        M = np.zeros((n, n))
        for d in range(-self.kl, self.ku + 1):  # d = j - i
            j0 = max(0, d)
            j1 = n + min(0, d)
            cols = np.arange(j0, j1)
            M[cols - d, cols] = self.data[self.ku - d, j0:j1]
        return M

    @classmethod
    def from_dense(cls, M, kl, ku):
        n = M.shape[0]
        data = np.zeros((kl + ku + 1, n))
        for d in range(-kl, ku + 1):
            j0 = max(0, d)
            j1 = n + min(0, d)
            cols = np.arange(j0, j1)
            data[ku - d, j0:j1] = M[cols - d, cols]
        return cls(data, kl, ku)


@dataclass
class BandedSystem:
    """Banded matrix plus right-hand side."""

    matrix: BandMatrix
    rhs: np.ndarray


def band_matvec(data, kl, ku, x):
    x = np.asarray(x, dtype=float)
    n = data.shape[1]
    y = np.zeros(n)
    for d in range(-kl, ku + 1):  # d = j - i
        j0 = max(0, d)
        j1 = n + min(0, d)
        if j1 > j0:
            y[j0 - d:j1 - d] += data[ku - d, j0:j1] * x[j0:j1]
    return y


def _empty_band(n, kl=3, ku=3):
    return BandMatrix(np.zeros((kl + ku + 1, n)), kl, ku)


def _scatter_blocks(band, blocks):
    """Add per-element 4x4 blocks along the diagonal of a band matrix.

    blocks is (N, 4, 4); element m couples global rows/cols m..m+3.
    """
    N = blocks.shape[0]
    ku = band.ku
    idx = np.arange(N)
    for a in range(4):
        for b in range(4):
            band.data[ku + a - b, idx + b] += blocks[:, a, b]
    return band


def assemble_global(elem, N):
    """Global mass, advection and dispersion operators for N elements.

    Operators act on the full coefficient vector delta_{-1..N+1}
    (dimension N+3) and are septa-diagonal.
    """
    if N < 4:
        raise ValueError(f"need at least 4 elements, got N={N}")
    out = []
    for M in (elem.A, elem.B, elem.D):
        band = _empty_band(N + 3)
        blocks = np.broadcast_to(M, (N, 4, 4))
        _scatter_blocks(band, blocks)
        out.append(band)
    return tuple(out)


def apply_nonlinear(elem_C, delta, N):
    """Band operator with entries sum_e sum_k delta_k int B_j B_k B_i'.

    Linear in delta; rebuilt from the precomputed 4x4x4 element tensor
    each time it is needed.
    """
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (N + 3,):
        raise ValueError(f"expected {N + 3} coefficients, got {delta.shape}")
    # element-local coefficient windows: W[m, k] = delta[m + k]
    W = np.lib.stride_tricks.sliding_window_view(delta, 4)[:N]
    blocks = np.einsum("mk,jki->mji", W, elem_C)
    return _scatter_blocks(_empty_band(N + 3), blocks)


@njit(cache=True)
def _band_lu(ab, kl, ku, tol):
    """In-place banded LU without pivoting; returns 0 or 1-based bad pivot."""
    n = ab.shape[1]
    for k in range(n - 1):
        piv = ab[ku, k]
        if abs(piv) <= tol or not np.isfinite(piv):
            return k + 1
        imax = min(k + kl, n - 1)
        jmax = min(k + ku, n - 1)
        for i in range(k + 1, imax + 1):
            m = ab[ku + i - k, k] / piv
            ab[ku + i - k, k] = m
            for j in range(k + 1, jmax + 1):
                ab[ku + i - j, j] -= m * ab[ku + k - j, j]
    last = ab[ku, n - 1]
    if abs(last) <= tol or not np.isfinite(last):
        return n
    return 0


@njit(cache=True)
def _band_lu_solve(ab, kl, ku, b):
    n = ab.shape[1]
    for k in range(n - 1):
        imax = min(k + kl, n - 1)
        for i in range(k + 1, imax + 1):
            b[i] -= ab[ku + i - k, k] * b[k]
    for k in range(n - 1, -1, -1):
        jmax = min(k + ku, n - 1)
        acc = b[k]
        for j in range(k + 1, jmax + 1):
            acc -= ab[ku + k - j, j] * b[j]
        b[k] = acc / ab[ku, k]
    return b


def band_solve(system, t=None):
    """Solve a banded system by no-pivot LU with a pivot guard.

    Raises SingularSystemError when a pivot falls below
    PIVOT_RTOL * max|entry|.
    """
    mat = system.matrix
    ab = np.ascontiguousarray(mat.data, dtype=float).copy()
    scale = np.max(np.abs(ab))
    tol = PIVOT_RTOL * scale if scale > 0.0 else 0.0
    bad = _band_lu(ab, mat.kl, mat.ku, tol)
    if bad:
        raise SingularSystemError(
            f"near-zero pivot at row {bad - 1} (guard {tol:.3e})", t=t)
    x = np.array(system.rhs, dtype=float, copy=True)
    _band_lu_solve(ab, mat.kl, mat.ku, x)
    return x
