"""Quadratic functionals, Gram matrices and min-max over trial subspaces.

The discrete functional

    F_n(g) = sum_{i=0}^{n} ((g_{i+1} - g_i)/dx)^2 dx + sum_{i=1}^{n} g_i^2 X_i

is exactly the Rayleigh quotient of -A_n built with the increments -X, once g
is normalized by sum g_i^2 dx = 1. Its continuum counterpart is

    F(g) = int (g')^2 dx + int g^2 dB.

Min-max values are computed over spans of the first m trial functions: the
Rayleigh-Ritz matrix of L_0 = -d^2/dx^2 + b' for the continuum, and a
generalized eigenproblem Q v = lambda G v with the discrete norm for F_n.

The "symmetric" convention of F_n above is the default. The "boundary_terms"
convention sums the first term over i = 1..n and adds the two boundary terms
(g_1 - g_0)/dx * g_1 + (g_{n+1} - g_n)/dx * g_n. That form does not match the
quadratic form at finite n (for n = 1 it gives 4 where the quadratic form
gives 8); both agree in the limit because the boundary terms vanish as the
mesh refines.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.polynomial import Legendre
from numpy.typing import ArrayLike, NDArray

from she_spectrum.tools.errors import InvalidInputError
from she_spectrum.tools.grid import Partition, check_boundary, make_partition
from she_spectrum.tools.linalg import (
    DenseSymmetric,
    SpectrumResult,
    eigen_dense,
    eigen_generalized,
)
from she_spectrum.tools.noise import BrownianPath, NoiseIncrements
from she_spectrum.tools.operator import OperatorParams, quadrature

RealFunction = Callable[[NDArray[np.float64]], NDArray[np.float64]]


class BasisKind(str, Enum):
    SINE = "sine"
    CUSTOM = "custom"


class Convention(str, Enum):
    """Summation convention of F_n."""

    SYMMETRIC = "symmetric"
    BOUNDARY_TERMS = "boundary_terms"


class Normalization(str, Enum):
    NONE = "none"
    L2 = "l2"
    DISCRETE = "discrete"


@dataclass(frozen=True)
class TrialBasis:
    """The trial functions e_1..e_m spanning the subspaces of the min-max.

    Sine bases use e_j(x) = sqrt(2) sin(j pi x), L2-orthonormal in closed
    form. Custom bases carry callables for values and derivatives; every
    member must vanish at 0 and 1.
    """

    m: int
    kind: BasisKind = BasisKind.SINE
    functions: tuple[RealFunction, ...] = ()
    derivatives: tuple[RealFunction, ...] = ()

    def __post_init__(self):
        if self.m < 1:
            raise InvalidInputError(f"A trial basis needs m >= 1 modes, got {self.m}")
        if self.kind is BasisKind.CUSTOM:
            if len(self.functions) != self.m or len(self.derivatives) != self.m:
                raise InvalidInputError(
                    f"Custom basis of size {self.m} needs {self.m} functions and derivatives"
                )
            ends = np.array([0.0, 1.0])
            for j, func in enumerate(self.functions, start=1):
                check_boundary(np.asarray(func(ends), dtype=np.float64), f"Basis function e_{j}")

    @classmethod
    def sine(cls, m: int) -> TrialBasis:
        return cls(m)

    @classmethod
    def custom(
        cls, functions: Sequence[RealFunction], derivatives: Sequence[RealFunction]
    ) -> TrialBasis:
        return cls(len(functions), BasisKind.CUSTOM, tuple(functions), tuple(derivatives))

    @classmethod
    def from_samples(
        cls, grid: ArrayLike, values: ArrayLike, derivatives: ArrayLike
    ) -> TrialBasis:
        """Custom basis from samples (m rows) on a fine grid, linearly interpolated."""
        grid = np.asarray(grid, dtype=np.float64)
        values = np.atleast_2d(np.asarray(values, dtype=np.float64))
        derivatives = np.atleast_2d(np.asarray(derivatives, dtype=np.float64))
        if values.shape != derivatives.shape or values.shape[1] != grid.size:
            raise InvalidInputError(
                f"Samples of shape {values.shape} / {derivatives.shape} do not match a grid "
                f"of {grid.size} points"
            )

        def interpolant(row: NDArray[np.float64]) -> RealFunction:
            return lambda x: np.interp(x, grid, row)

        return cls.custom(
            [interpolant(row) for row in values], [interpolant(row) for row in derivatives]
        )

    def values(self, x: ArrayLike, k: int | None = None) -> NDArray[np.float64]:
        """Matrix of e_j(x) with one row per mode j = 1..k (default all m)."""
        x = np.asarray(x, dtype=np.float64)
        k = self.m if k is None else k
        if self.kind is BasisKind.SINE:
            modes = np.arange(1, k + 1)[:, None]
            return np.sqrt(2.0) * np.sin(np.pi * modes * x[None, :])
        return np.array([func(x) for func in self.functions[:k]], dtype=np.float64)

    def derivative_values(self, x: ArrayLike, k: int | None = None) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=np.float64)
        k = self.m if k is None else k
        if self.kind is BasisKind.SINE:
            modes = np.arange(1, k + 1)[:, None]
            return np.sqrt(2.0) * np.pi * modes * np.cos(np.pi * modes * x[None, :])
        return np.array([func(x) for func in self.derivatives[:k]], dtype=np.float64)


def polynomial_basis(m: int) -> TrialBasis:
    """
    L2-orthonormal polynomials spanning x^j (1 - x), j = 1..m.

    Inner products use Gauss-Legendre quadrature of sufficient order, so the
    family is orthonormal up to rounding while its sampled Gram matrices only
    approach the identity as the grid refines.
    """
    if m < 1:
        raise InvalidInputError(f"A trial basis needs m >= 1 modes, got {m}")
    # e_j = x (1 - x) P_j keeps exact zeros at both ends; the P_j are
    # orthonormal under the weight (x (1 - x))^2.
    nodes, weights = np.polynomial.legendre.leggauss(m + 3)
    t = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights * (t * (1.0 - t)) ** 2

    def inner(p: Legendre, q: Legendre) -> float:
        return float(np.sum(weights * p(t) * q(t)))

    factors: list[Legendre] = []
    for j in range(m):
        p = Legendre.basis(j, domain=[0.0, 1.0])
        for _ in range(2):
            for q in factors:
                p = p - inner(p, q) * q
        factors.append(p / np.sqrt(inner(p, p)))

    def member(p: Legendre) -> RealFunction:
        return lambda x: x * (1.0 - x) * p(x)

    def member_derivative(p: Legendre) -> RealFunction:
        dp = p.deriv()
        return lambda x: (1.0 - 2.0 * x) * p(x) + x * (1.0 - x) * dp(x)

    return TrialBasis.custom(
        [member(p) for p in factors], [member_derivative(p) for p in factors]
    )


@dataclass(frozen=True)
class TrialCoefficients:
    """Coefficients alpha of g = sum_j alpha_j e_j and the normalization they satisfy."""

    alpha: NDArray[np.float64]
    normalization: Normalization = Normalization.NONE

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=np.float64).ravel()
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    def evaluate(self, basis: TrialBasis, x: ArrayLike) -> NDArray[np.float64]:
        return self.alpha @ basis.values(x, self.alpha.size)

    def derivative(self, basis: TrialBasis, x: ArrayLike) -> NDArray[np.float64]:
        return self.alpha @ basis.derivative_values(x, self.alpha.size)

    def normalized(
        self, basis: TrialBasis, partition: Partition | None = None
    ) -> TrialCoefficients:
        """
        Rescale alpha to unit norm.

        Without a partition the L2 norm of an orthonormal basis is used
        (|alpha| = 1). With a partition the discrete constraint
        sum_i g(x_i)^2 dx = alpha^T G alpha = 1 is imposed instead.
        """
        if partition is None:
            norm_sq = float(self.alpha @ self.alpha)
            kind = Normalization.L2
        else:
            gram = gram_matrix(basis, self.alpha.size, partition).entries
            norm_sq = float(self.alpha @ gram @ self.alpha)
            kind = Normalization.DISCRETE
        if not norm_sq > 0:
            raise InvalidInputError("Cannot normalize a trial function of zero norm")
        return TrialCoefficients(self.alpha / np.sqrt(norm_sq), kind)


def F_discrete(  # noqa: N802
    g_nodes: ArrayLike,
    noise: NoiseIncrements,
    convention: Convention | str = Convention.SYMMETRIC,
    beta: float = 1.0,
) -> float:
    """
    The discrete functional F_n at node values g_0..g_{n+1}.

    Args:
        g_nodes: g at every node; g_0 = g_{n+1} = 0
        noise: Increments X_1..X_n
        convention: "symmetric" (default) or "boundary_terms"
        beta: Weight of the gradient term, boundary terms included

    With n = 1, g = (0, sqrt(2), 0) and X = 0 the symmetric form gives 8,
    the Rayleigh quotient of the noise-free -A_1.
    """
    convention = Convention(convention)
    g = np.asarray(g_nodes, dtype=np.float64)
    if g.shape != (noise.n + 2,):
        raise InvalidInputError(f"Expected {noise.n + 2} node values, got shape {g.shape}")
    check_boundary(g, "g")
    dx = noise.dx
    slopes = np.diff(g) / dx
    noise_term = float(np.dot(g[1:-1] ** 2, noise.x))
    if convention is Convention.SYMMETRIC:
        return beta * float(np.sum(slopes**2) * dx) + noise_term
    boundary = slopes[0] * g[1] + slopes[-1] * g[-2]
    return beta * (float(np.sum(slopes[1:] ** 2) * dx) + float(boundary)) + noise_term


def F_continuum(g: ArrayLike, dg: ArrayLike, path: BrownianPath) -> float:  # noqa: N802
    """
    F(g) = int (g')^2 dx + int g^2 dB on the path's fine grid.

    Args:
        g, dg: g and g' at t_0..t_{fine_n}; g vanishes at 0 and 1
        path: Integrator of the noise term
    """
    g = np.asarray(g, dtype=np.float64)
    dg = np.asarray(dg, dtype=np.float64)
    for name, values in (("g", g), ("g'", dg)):
        if values.shape != (path.fine_n + 1,):
            raise InvalidInputError(
                f"{name} must be sampled at the {path.fine_n + 1} fine nodes, "
                f"got shape {values.shape}"
            )
    check_boundary(g, "g")
    return quadrature(dg**2) + float(np.dot(g[:-1] ** 2, path.increments))


def gram_matrix(basis: TrialBasis, k: int, partition: Partition) -> DenseSymmetric:
    """
    Discrete Gram matrix U_n U_n^T with entries sum_r e_i(x_r) e_j(x_r) dx.

    Raises:
        InvalidInputError: If k is not in 1..basis.m
    """
    if not 1 <= k <= basis.m:
        raise InvalidInputError(f"k must be in 1..{basis.m}, got {k}")
    sampled = basis.values(partition.interior, k)
    return DenseSymmetric(sampled @ sampled.T * partition.dx)


def ritz_spectrum(
    m: int, path: BrownianPath, k: int, tol: float = 1e-9
) -> SpectrumResult:
    """
    Rayleigh-Ritz estimates of the k smallest eigenvalues of L_0 = -d^2/dx^2 + b'.

    The Ritz matrix on the first m sine modes is
    R_ij = delta_ij (i pi)^2 + sum_t e_i(t) e_j(t) dB(t), with the stiffness in
    closed form and the noise term as a left-endpoint Ito sum on the path's
    grid. The values are upper bounds that do not increase with m.

    Raises:
        InvalidInputError: If k > m
    """
    if not 1 <= k <= m:
        raise InvalidInputError(f"Need 1 <= k <= m, got k={k}, m={m}")
    left = TrialBasis.sine(m).values(path.times[:-1])
    noise_matrix = (left * path.increments) @ left.T
    stiffness = np.diag((np.pi * np.arange(1, m + 1)) ** 2)
    ritz = stiffness + 0.5 * (noise_matrix + noise_matrix.T)
    spectrum = eigen_dense(DenseSymmetric(ritz), tol)
    return SpectrumResult(spectrum.eigenvalues[:k], spectrum.tolerance, m)


def minmax_discrete(
    m: int, params: OperatorParams, noise: NoiseIncrements, k: int, tol: float = 1e-9
) -> SpectrumResult:
    """
    Min-max of F_n over spans of the first m sine modes under sum g(x_i)^2 dx = 1.

    Solves Q v = lambda G v where Q is the bilinear form of F_n (symmetric
    convention, gradient weighted by beta) and G the discrete Gram matrix.
    With m = n the sampled modes span R^n and the result is the spectrum of
    -A_n built with -X.

    Raises:
        InvalidInputError: Unless 1 <= k <= m <= n
        SingularGramError: If G is not positive definite
    """
    if noise.n != params.n:
        raise InvalidInputError(f"Noise has n={noise.n} but the operator has n={params.n}")
    if not 1 <= k <= m <= params.n:
        raise InvalidInputError(f"Need 1 <= k <= m <= n, got k={k}, m={m}, n={params.n}")
    partition = make_partition(params.n)
    basis = TrialBasis.sine(m)
    nodes = basis.values(partition.points)
    # Sine modes vanish at both ends up to rounding; pin them to exact zeros.
    nodes[:, 0] = 0.0
    nodes[:, -1] = 0.0
    slopes = np.diff(nodes, axis=1) / partition.dx
    interior = nodes[:, 1:-1]
    Q = params.beta * (slopes @ slopes.T) * partition.dx + (interior * noise.x) @ interior.T
    G = gram_matrix(basis, m, partition)
    spectrum = eigen_generalized(DenseSymmetric(0.5 * (Q + Q.T)), G, tol)
    return SpectrumResult(spectrum.eigenvalues[:k], spectrum.tolerance, m)
