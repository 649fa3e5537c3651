"""The random operator L = beta d^2/dx^2 + (.) b' and its discretizations.

Covers the tridiagonal matrix A_n, its action on grid samples, the weak form
<Lu, v> of the continuum operator (Ito and integration-by-parts variants),
the discrete weak form <L_n u, v>, and an explicit-Euler demonstration
stepper for the stochastic heat equation u_t = beta u_xx + u w'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from she_spectrum.tools.errors import InvalidInputError, StabilityError
from she_spectrum.tools.grid import Partition, check_boundary, make_partition
from she_spectrum.tools.linalg import SymTridiagonal
from she_spectrum.tools.noise import SHE_STREAM, BrownianPath, NoiseIncrements, stream_generator


@dataclass(frozen=True)
class OperatorParams:
    """Diffusion coefficient beta and grid size n of a discretized operator."""

    beta: float
    n: int

    def __post_init__(self):
        if not self.beta > 0:
            raise InvalidInputError(f"beta must be positive, got {self.beta}")
        make_partition(self.n)

    @property
    def partition(self) -> Partition:
        return make_partition(self.n)

    @property
    def dx(self) -> float:
        return 1.0 / (self.n + 1)


class WeakFormVariant(str, Enum):
    """Which expression evaluates the noise term of <Lu, v>."""

    ITO = "ito"
    BY_PARTS = "by_parts"


def _check_noise(params: OperatorParams, noise: NoiseIncrements) -> None:
    if noise.n != params.n:
        raise InvalidInputError(f"Noise has n={noise.n} but the operator has n={params.n}")


def assemble_matrix(params: OperatorParams, noise: NoiseIncrements) -> SymTridiagonal:
    """
    Assemble A_n: diagonal X_i/dx - 2 beta (n+1)^2, off-diagonal beta (n+1)^2.

    Example:
        >>> T = assemble_matrix(OperatorParams(1.0, 2), iid_noise(0, 2, scale=0.0))
        >>> T.diag.tolist(), T.offdiag.tolist()
        ([-18.0, -18.0], [9.0])
    """
    _check_noise(params, noise)
    inv_dx2 = float((params.n + 1) ** 2)
    diag = noise.x / params.dx - 2.0 * params.beta * inv_dx2
    offdiag = np.full(params.n - 1, params.beta * inv_dx2)
    return SymTridiagonal(diag, offdiag)


def apply_discrete(
    u_samples: ArrayLike, params: OperatorParams, noise: NoiseIncrements
) -> NDArray[np.float64]:
    """
    The action of A_n on interior samples, with u(x_0) = u(x_{n+1}) = 0.

    result_i = beta (u_{i+1} - 2 u_i + u_{i-1}) / dx^2 + u_i X_i / dx
    """
    _check_noise(params, noise)
    u = np.asarray(u_samples, dtype=np.float64)
    if u.shape != (params.n,):
        raise InvalidInputError(f"Expected {params.n} interior samples, got shape {u.shape}")
    padded = np.pad(u, 1)
    laplacian = (padded[2:] - 2.0 * padded[1:-1] + padded[:-2]) / params.dx**2
    return params.beta * laplacian + u * noise.x / params.dx


def _fine_samples(path: BrownianPath, **arrays: ArrayLike) -> dict[str, NDArray[np.float64]]:
    out = {}
    for name, values in arrays.items():
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (path.fine_n + 1,):
            raise InvalidInputError(
                f"{name} must be sampled at the {path.fine_n + 1} fine nodes, "
                f"got shape {values.shape}"
            )
        out[name] = values
    return out


def quadrature(values: NDArray[np.float64]) -> float:
    """Left-endpoint Riemann sum on the uniform fine grid of len(values) - 1 steps."""
    return float(np.sum(values[:-1]) / (values.size - 1))


def weak_form_continuum(
    u: ArrayLike,
    du: ArrayLike,
    v: ArrayLike,
    dv: ArrayLike,
    beta: float,
    path: BrownianPath,
    variant: WeakFormVariant | str = WeakFormVariant.ITO,
) -> float:
    """
    <Lu, v> for the continuum operator, evaluated on the path's fine grid.

    ito:      -beta int u'v' dx + int u v dB
    by_parts: -beta int u'v' dx - int (u'v + u v') B dx

    Args:
        u, du, v, dv: Values and derivatives at t_0..t_{fine_n}; u and v vanish at 0 and 1
        beta: Diffusion coefficient
        path: Brownian path driving the noise term
        variant: Expression used for the noise term
    """
    variant = WeakFormVariant(variant)
    s = _fine_samples(path, u=u, du=du, v=v, dv=dv)
    check_boundary(s["u"], "u")
    check_boundary(s["v"], "v")
    dirichlet = quadrature(s["du"] * s["dv"])
    if variant is WeakFormVariant.ITO:
        noise_term = float(np.dot((s["u"] * s["v"])[:-1], path.increments))
    else:
        noise_term = -quadrature((s["du"] * s["v"] + s["u"] * s["dv"]) * path.values)
    return -beta * dirichlet + noise_term


def weak_form_discrete(
    u_nodes: ArrayLike, v_nodes: ArrayLike, params: OperatorParams, noise: NoiseIncrements
) -> float:
    """
    <L_n u, v> = sum_i [A_n u]_i v(x_i) dx.

    Args:
        u_nodes, v_nodes: u and v at x_0..x_{n+1}; both vanish at 0 and 1
    """
    u = np.asarray(u_nodes, dtype=np.float64)
    v = np.asarray(v_nodes, dtype=np.float64)
    for name, nodes in (("u", u), ("v", v)):
        if nodes.shape != (params.n + 2,):
            raise InvalidInputError(
                f"{name} must be sampled at the {params.n + 2} nodes, got shape {nodes.shape}"
            )
        check_boundary(nodes, name)
    action = apply_discrete(u[1:-1], params, noise)
    return float(np.dot(action, v[1:-1]) * params.dx)


@dataclass(frozen=True)
class SheState:
    """Heat-equation solution at time t on the interior nodes (zero at both ends)."""

    partition: Partition
    u: NDArray[np.float64]
    t: float

    def __post_init__(self):
        u = np.array(self.u, dtype=np.float64)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.u**2) * self.partition.dx))


def max_stable_dt(params: OperatorParams) -> float:
    """dx^2 / (2 beta), the explicit-Euler stability bound."""
    return params.dx**2 / (2.0 * params.beta)


def simulate_she(
    initial: ArrayLike,
    params: OperatorParams,
    dt: float,
    steps: int,
    seed: int,
    noise_on: bool = True,
    stride: int = 1,
) -> list[SheState]:
    """
    Explicit Euler for u_t = beta u_xx + u w' with Dirichlet boundaries.

    Each step draws fresh spatial noise eta_i ~ N(0, dt/dx) from stream
    SHE_STREAM of ``seed``:

        u_i <- u_i + dt beta (u_{i+1} - 2 u_i + u_{i-1}) / dx^2 + u_i eta_i

    Args:
        initial: u at the interior nodes at t = 0
        params: beta and grid size
        dt: Time step, at most dx^2 / (2 beta)
        steps: Number of steps, at least 1
        seed: Seed of the space-time noise
        noise_on: When false, eta is identically 0
        stride: Record every ``stride``-th step

    Returns:
        list[SheState]: The initial state, every stride-th state and the final state

    Raises:
        StabilityError: If dt exceeds the stability bound
    """
    u = np.array(initial, dtype=np.float64)
    if u.shape != (params.n,):
        raise InvalidInputError(f"Expected {params.n} initial values, got shape {u.shape}")
    if steps < 1:
        raise InvalidInputError(f"steps must be >= 1, got {steps}")
    if stride < 1:
        raise InvalidInputError(f"stride must be >= 1, got {stride}")
    bound = max_stable_dt(params)
    if not 0 < dt <= bound:
        raise StabilityError(
            f"dt={dt!r} violates the explicit-Euler stability bound; "
            f"admissible dt <= {bound!r} (dx^2 / (2 beta))",
            dt=dt,
            max_dt=bound,
        )

    partition = params.partition
    rng = stream_generator(seed, SHE_STREAM)
    noise_sd = math.sqrt(dt / params.dx)
    rate = dt * params.beta / params.dx**2
    states = [SheState(partition, u, 0.0)]
    for step in range(1, steps + 1):
        padded = np.pad(u, 1)
        update = rate * (padded[2:] - 2.0 * padded[1:-1] + padded[:-2])
        if noise_on:
            update += u * (noise_sd * rng.standard_normal(params.n))
        u = u + update
        if step % stride == 0 or step == steps:
            states.append(SheState(partition, u, step * dt))
    return states
