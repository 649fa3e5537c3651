"""Uniform partitions of [0, 1] and the two projections used on them.

A partition with ``n`` interior points has mesh ``dx = 1 / (n + 1)`` and
nodes ``x_k = k / (n + 1)``. Functions in the Dirichlet space are projected
either onto right-continuous step functions (value ``u(x_i)`` on
``[x_i, x_{i+1})``, zero on the first cell and at ``x = 1``) or onto the
continuous piecewise-linear interpolant of their node values.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from she_spectrum.config import BOUNDARY_TOL
from she_spectrum.tools.errors import InvalidInputError


def _frozen(values: ArrayLike) -> NDArray[np.float64]:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Partition:
    """The uniform grid with ``n`` interior points on [0, 1]."""

    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise InvalidInputError(f"Partition size must be an integer, got {self.n!r}")
        if self.n < 1:
            raise InvalidInputError(
                f"Partition needs at least one interior point (n >= 1), got n={self.n}"
            )

    @property
    def dx(self) -> float:
        return 1.0 / (self.n + 1)

    @property
    def points(self) -> NDArray[np.float64]:
        """All nodes x_0 = 0 < x_1 < ... < x_{n+1} = 1."""
        return _frozen(np.arange(self.n + 2) / (self.n + 1))

    @property
    def interior(self) -> NDArray[np.float64]:
        """The interior nodes x_1..x_n."""
        return self.points[1:-1]


def make_partition(n: int) -> Partition:
    """
    Build the uniform partition with ``n`` interior points.

    Args:
        n: Number of interior points, at least 1

    Returns:
        Partition: Grid with dx = 1/(n+1)

    Raises:
        InvalidInputError: If n < 1 (the matrix A_n would be empty)

    Example:
        >>> make_partition(3).points.tolist()
        [0.0, 0.25, 0.5, 0.75, 1.0]
    """
    return Partition(int(n) if isinstance(n, np.integer) else n)


def sample_nodes(func: Callable[[NDArray], ArrayLike], partition: Partition) -> NDArray:
    """Evaluate ``func`` at every node x_0..x_{n+1}."""
    return np.asarray(func(partition.points), dtype=np.float64)


def sample_interior(func: Callable[[NDArray], ArrayLike], partition: Partition) -> NDArray:
    """Evaluate ``func`` at the interior nodes x_1..x_n."""
    return np.asarray(func(partition.interior), dtype=np.float64)


def check_boundary(node_values: NDArray, what: str = "node values") -> None:
    """Reject node arrays that do not vanish at both endpoints."""
    if abs(node_values[0]) > BOUNDARY_TOL or abs(node_values[-1]) > BOUNDARY_TOL:
        raise InvalidInputError(
            f"{what} must vanish at 0 and 1, got g(0)={node_values[0]!r}, "
            f"g(1)={node_values[-1]!r}"
        )


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous step function with value ``values[i-1]`` on [x_i, x_{i+1}).

    Only the interior values are stored; the zero first cell and the zero at
    x = 1 are structural.
    """

    partition: Partition
    values: NDArray[np.float64]

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))

    def __call__(self, x: ArrayLike) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=np.float64)
        # Cell index k with x_k <= x < x_{k+1}; k = 0 is the first cell, k = n+1 is x = 1.
        cell = np.searchsorted(self.partition.points, x, side="right") - 1
        padded = np.concatenate(([0.0], self.values, [0.0]))
        return padded[np.clip(cell, 0, self.partition.n + 1)]

    @property
    def l2_norm(self) -> float:
        """sqrt(sum v_i^2 dx), the exact L2 norm of the step function."""
        return float(np.sqrt(np.sum(self.values**2) * self.partition.dx))


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous interpolant of node values g_0..g_{n+1} with g_0 = g_{n+1} = 0."""

    partition: Partition
    node_values: NDArray[np.float64]

    def __post_init__(self):
        object.__setattr__(self, "node_values", _frozen(self.node_values))

    def __call__(self, x: ArrayLike) -> NDArray[np.float64]:
        return np.interp(np.asarray(x, dtype=np.float64), self.partition.points, self.node_values)

    @property
    def derivative(self) -> NDArray[np.float64]:
        """Slope (g_{i+1} - g_i)/dx on each of the n+1 cells."""
        return np.diff(self.node_values) / self.partition.dx

    @property
    def dirichlet_energy(self) -> float:
        """Integral of the squared derivative, exact for piecewise-linear functions."""
        return float(np.sum(self.derivative**2) * self.partition.dx)


def project_step(samples: ArrayLike, partition: Partition) -> StepFunction:
    """
    Project interior samples onto the step-function space of ``partition``.

    Args:
        samples: Values u(x_1)..u(x_n)
        partition: Target grid

    Returns:
        StepFunction: u_n with value u(x_i) on [x_i, x_{i+1}), 0 on [0, x_1) and at 1

    Raises:
        InvalidInputError: If the sample count differs from partition.n
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape != (partition.n,):
        raise InvalidInputError(
            f"Expected {partition.n} interior samples, got shape {samples.shape}"
        )
    return StepFunction(partition, samples)


def interp_linear(node_values: ArrayLike, partition: Partition) -> PiecewiseLinear:
    """
    Join the node values g_0..g_{n+1} with straight lines.

    Raises:
        InvalidInputError: On a length mismatch or nonzero boundary values
    """
    node_values = np.asarray(node_values, dtype=np.float64)
    if node_values.shape != (partition.n + 2,):
        raise InvalidInputError(
            f"Expected {partition.n + 2} node values, got shape {node_values.shape}"
        )
    check_boundary(node_values)
    return PiecewiseLinear(partition, node_values)
