"""Eigenvalue solvers: Sturm bisection, cyclic Jacobi and a generalized reduction.

Bisection on Sturm counts is the workhorse: the studies need the k smallest
eigenvalues of large symmetric tridiagonal matrices, which costs
O(k * n * log(range / tol)). The dense Jacobi solver is the reference oracle
and solves the small Ritz and min-max matrices. Hot loops are compiled with
numba and release the GIL, so threaded replicas run in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray
from rich.console import Console

from she_spectrum.config import JACOBI_MAX_SWEEPS
from she_spectrum.tools.errors import (
    AsymmetricMatrixError,
    InvalidInputError,
    SingularGramError,
)

console = Console(stderr=True)

EPS = float(np.finfo(np.float64).eps)

# Largest tolerated |M - M^T| entry, relative to max(1, max |M|).
ASYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class SymTridiagonal:
    """Symmetric tridiagonal matrix stored as its diagonal and one off-diagonal band."""

    diag: NDArray[np.float64]
    offdiag: NDArray[np.float64]

    def __post_init__(self):
        diag = np.array(self.diag, dtype=np.float64).ravel()
        offdiag = np.array(self.offdiag, dtype=np.float64).ravel()
        if diag.size < 1:
            raise InvalidInputError("A tridiagonal matrix needs at least one diagonal entry")
        if offdiag.size != diag.size - 1:
            raise InvalidInputError(
                f"Off-diagonal must have {diag.size - 1} entries, got {offdiag.size}"
            )
        diag.setflags(write=False)
        offdiag.setflags(write=False)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", offdiag)

    @property
    def n(self) -> int:
        return self.diag.size

    @property
    def inf_norm(self) -> float:
        """Maximum absolute row sum."""
        radius = np.zeros(self.n)
        radius[:-1] += np.abs(self.offdiag)
        radius[1:] += np.abs(self.offdiag)
        return float(np.max(np.abs(self.diag) + radius))

    def matvec(self, u: ArrayLike) -> NDArray[np.float64]:
        u = np.asarray(u, dtype=np.float64)
        if u.shape != (self.n,):
            raise InvalidInputError(f"Expected a vector of length {self.n}, got {u.shape}")
        out = self.diag * u
        out[:-1] += self.offdiag * u[1:]
        out[1:] += self.offdiag * u[:-1]
        return out

    def negated(self) -> SymTridiagonal:
        return SymTridiagonal(-self.diag, -self.offdiag)

    def to_dense(self) -> DenseSymmetric:
        entries = np.diag(self.diag)
        if self.n > 1:
            entries += np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        return DenseSymmetric(entries)


@dataclass(frozen=True)
class DenseSymmetric:
    """A dense square matrix that is meant to be symmetric."""

    entries: NDArray[np.float64]

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] < 1:
            raise InvalidInputError(
                f"Expected a non-empty square matrix, got shape {entries.shape}"
            )
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def asymmetry(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.T)))


@dataclass(frozen=True)
class SpectrumResult:
    """Eigenvalues sorted ascending.

    Attributes:
        eigenvalues: The computed eigenvalues
        tolerance: Achieved accuracy (final bracket width or off-diagonal mass)
        size: Dimension of the matrix they came from
        first_index: 1-based index of eigenvalues[0] within the full spectrum
    """

    eigenvalues: NDArray[np.float64]
    tolerance: float
    size: int
    first_index: int = 1

    def __post_init__(self):
        eigenvalues = np.array(self.eigenvalues, dtype=np.float64)
        eigenvalues.setflags(write=False)
        object.__setattr__(self, "eigenvalues", eigenvalues)

    def __len__(self) -> int:
        return self.eigenvalues.size


def gershgorin_bounds(T: SymTridiagonal) -> tuple[float, float]:
    """
    Interval [lo, hi] containing every eigenvalue of T.

    Example:
        >>> gershgorin_bounds(SymTridiagonal([2.0, 2.0], [-1.0]))
        (1.0, 3.0)
    """
    radius = np.zeros(T.n)
    radius[:-1] += np.abs(T.offdiag)
    radius[1:] += np.abs(T.offdiag)
    return float(np.min(T.diag - radius)), float(np.max(T.diag + radius))


@numba.njit(cache=True, nogil=True)
def _sturm_count(diag, off_sq, shift, pivmin):
    count = 0
    d = diag[0] - shift
    if abs(d) < pivmin:
        d = -pivmin
    if d < 0.0:
        count += 1
    for i in range(1, diag.size):
        d = (diag[i] - shift) - off_sq[i - 1] / d
        if abs(d) < pivmin:
            d = -pivmin
        if d < 0.0:
            count += 1
    return count


@numba.njit(cache=True, nogil=True)
def _bisect(diag, off_sq, k_lo, k_hi, lo, hi, tol, pivmin, eps):
    # One independent bracket per index; a cluster simply yields coinciding values.
    count = k_hi - k_lo + 1
    values = np.empty(count)
    widths = np.empty(count)
    for j in range(count):
        k = k_lo + j
        left = lo
        right = hi
        while True:
            width = right - left
            floor = 4.0 * eps * max(abs(left), abs(right))
            if width < tol or width <= floor:
                break
            mid = 0.5 * (left + right)
            if mid <= left or mid >= right:
                break
            # Fewer than k eigenvalues below mid means lambda_k >= mid.
            if _sturm_count(diag, off_sq, mid, pivmin) < k:
                left = mid
            else:
                right = mid
        values[j] = 0.5 * (left + right)
        widths[j] = right - left
    return values, widths


def _pivmin(T: SymTridiagonal) -> float:
    return EPS * max(T.inf_norm, np.finfo(np.float64).tiny)


def sturm_count(T: SymTridiagonal, shift: float) -> int:
    """
    Number of eigenvalues of T strictly below ``shift``.

    Counts the negative pivots of the LDL^T factorization of T - shift*I.
    Pivots smaller than eps*||T||_inf in magnitude, including exact zeros, are
    replaced by -eps*||T||_inf.

    Example:
        >>> sturm_count(SymTridiagonal([2.0, 2.0], [-1.0]), 2.0)
        1
    """
    return int(_sturm_count(T.diag, T.offdiag**2, float(shift), _pivmin(T)))


def eigen_bisect(
    T: SymTridiagonal, k_range: tuple[int, int] | None = None, tol: float = 1e-9
) -> SpectrumResult:
    """
    Eigenvalues lambda_{k_lo}..lambda_{k_hi} of T by Sturm-sequence bisection.

    Args:
        T: Symmetric tridiagonal matrix
        k_range: Inclusive 1-based index range (k_lo, k_hi); defaults to all n
        tol: Target bracket width, > 0

    Returns:
        SpectrumResult: The requested eigenvalues ascending. ``tolerance`` is
        the widest final bracket, which exceeds ``tol`` only when floating
        resolution at the eigenvalue's magnitude is coarser than ``tol``.

    Raises:
        InvalidInputError: For an invalid range or tol <= 0
    """
    k_lo, k_hi = k_range if k_range is not None else (1, T.n)
    if not 1 <= k_lo <= k_hi <= T.n:
        raise InvalidInputError(
            f"Eigenvalue index range must satisfy 1 <= k_lo <= k_hi <= {T.n}, "
            f"got ({k_lo}, {k_hi})"
        )
    if not tol > 0:
        raise InvalidInputError(f"Bisection tolerance must be positive, got {tol}")

    lo, hi = gershgorin_bounds(T)
    pivmin = _pivmin(T)
    # Open the bracket slightly so eigenvalues at the Gershgorin ends are strictly inside.
    pad = 2.0 * pivmin + 2.0 * EPS * max(abs(lo), abs(hi))
    values, widths = _bisect(
        T.diag, T.offdiag**2, int(k_lo), int(k_hi), lo - pad, hi + pad, float(tol), pivmin, EPS
    )
    return SpectrumResult(values, float(np.max(widths)), T.n, first_index=int(k_lo))


@numba.njit(cache=True, nogil=True)
def _jacobi(a, tol, max_sweeps):
    m = a.shape[0]
    sweeps = 0
    while True:
        off = 0.0
        for p in range(m):
            for q in range(p + 1, m):
                off += 2.0 * a[p, q] * a[p, q]
        off = np.sqrt(off)
        if off < tol or sweeps >= max_sweeps:
            return off, sweeps
        sweeps += 1
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for r in range(m):
                    arp = a[r, p]
                    arq = a[r, q]
                    a[r, p] = c * arp - s * arq
                    a[r, q] = s * arp + c * arq
                for r in range(m):
                    apr = a[p, r]
                    aqr = a[q, r]
                    a[p, r] = c * apr - s * aqr
                    a[q, r] = s * apr + c * aqr
                a[p, q] = 0.0
                a[q, p] = 0.0


def eigen_dense(M: DenseSymmetric, tol: float = 1e-9) -> SpectrumResult:
    """
    All eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations.

    Sweeps run until the off-diagonal Frobenius mass drops below ``tol``, or
    below the floating floor eps * ||M||_F when that is larger.

    Raises:
        AsymmetricMatrixError: If M deviates from symmetry beyond 1e-12 (relative)
        InvalidInputError: If tol <= 0
    """
    if not tol > 0:
        raise InvalidInputError(f"Jacobi tolerance must be positive, got {tol}")
    scale = max(1.0, float(np.max(np.abs(M.entries))))
    if M.asymmetry > ASYMMETRY_TOL * scale:
        raise AsymmetricMatrixError(
            f"Matrix is not symmetric: max |M - M^T| = {M.asymmetry:.3e}"
        )
    work = 0.5 * (M.entries + M.entries.T)
    target = max(float(tol), 4.0 * EPS * float(np.linalg.norm(work)))
    off, sweeps = _jacobi(work, target, JACOBI_MAX_SWEEPS)
    if off >= target:
        console.print(
            f"[yellow]⚠[/yellow] Jacobi stopped after {sweeps} sweeps with "
            f"off-diagonal mass {off:.3e} (target {target:.3e})"
        )
    return SpectrumResult(np.sort(np.diag(work)), float(off), M.m)


def eigen_generalized(Q: DenseSymmetric, G: DenseSymmetric, tol: float = 1e-9) -> SpectrumResult:
    """
    Eigenvalues of Q v = lambda G v for symmetric Q and positive definite G.

    Reduces with the Cholesky factor G = L L^T to the standard problem for
    L^{-1} Q L^{-T}, then runs :func:`eigen_dense`.

    Raises:
        SingularGramError: If the Cholesky factorization of G fails
    """
    if Q.m != G.m:
        raise InvalidInputError(f"Q is {Q.m}x{Q.m} but G is {G.m}x{G.m}")
    try:
        lower = scipy.linalg.cholesky(G.entries, lower=True)
    except np.linalg.LinAlgError as e:
        raise SingularGramError(
            f"Gram matrix is not positive definite ({e}); the trial basis is degenerate "
            "on this grid"
        ) from e
    half = scipy.linalg.solve_triangular(lower, Q.entries, lower=True)
    reduced = scipy.linalg.solve_triangular(lower, half.T, lower=True)
    return eigen_dense(DenseSymmetric(0.5 * (reduced + reduced.T)), tol)
