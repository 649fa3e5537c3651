"""Seedable Brownian paths and the Gaussian increments X_i built from them.

Every Gaussian draw comes from ``numpy.random.Philox``, a counter-based
generator keyed by ``(seed, stream_id)``. The draw at a given position of a
stream is a pure function of those values, so replicas reproduce bit for bit
no matter how they are scheduled.

Stream ids are fixed: :data:`PATH_STREAM` for Brownian paths,
:data:`IID_STREAM` for independent increments and :data:`SHE_STREAM` for the
space-time noise of the heat-equation stepper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from she_spectrum.config import MIN_FINE_N
from she_spectrum.tools.errors import DivisibilityError, InvalidInputError
from she_spectrum.tools.grid import make_partition

PATH_STREAM = 0
IID_STREAM = 1
SHE_STREAM = 2

_MASK64 = (1 << 64) - 1


def splitmix64(value: int) -> int:
    """One round of the splitmix64 finalizer on a 64-bit integer."""
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *labels: int) -> int:
    """
    Expand ``seed`` and integer labels into an independent 64-bit seed.

    Used for replica streams: replica ``r`` of a study seeded with ``seed``
    draws from ``derive_seed(seed, r)``.

    Example:
        >>> derive_seed(7, 0) != derive_seed(7, 1)
        True
    """
    state = splitmix64(int(seed) & _MASK64)
    for label in labels:
        state = splitmix64(state ^ splitmix64(int(label) & _MASK64))
    return state


def stream_key(seed: int, stream_id: int) -> int:
    """128-bit Philox key for the stream ``stream_id`` of ``seed``."""
    seed = int(seed) & _MASK64
    low = splitmix64(seed)
    high = splitmix64(seed ^ splitmix64(int(stream_id) + 1))
    return low | (high << 64)


def stream_generator(seed: int, stream_id: int) -> np.random.Generator:
    """A fresh generator positioned at counter 0 of the given stream."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, stream_id)))


def normal_stream(seed: int, stream_id: int, size: int) -> NDArray[np.float64]:
    """The first ``size`` standard normal draws of a stream."""
    return stream_generator(seed, stream_id).standard_normal(size)


class Provenance(str, Enum):
    """How a set of increments was produced."""

    COUPLED = "coupled"
    IID = "iid"


@dataclass(frozen=True)
class BrownianPath:
    """Brownian motion sampled at t_j = j / fine_n, j = 0..fine_n."""

    fine_n: int
    values: NDArray[np.float64]

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (self.fine_n + 1,):
            raise InvalidInputError(
                f"Path with fine_n={self.fine_n} needs {self.fine_n + 1} values, "
                f"got shape {values.shape}"
            )
        if values[0] != 0.0:
            raise InvalidInputError(f"Brownian path must start at 0, got B_0={values[0]!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values: ArrayLike) -> BrownianPath:
        """Wrap explicit values B_0..B_{fine_n}, e.g. a forced path read from a file."""
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise InvalidInputError("A path needs at least two values B_0, B_1")
        return cls(values.size - 1, values)

    @property
    def times(self) -> NDArray[np.float64]:
        return np.arange(self.fine_n + 1) / self.fine_n

    @property
    def increments(self) -> NDArray[np.float64]:
        return np.diff(self.values)

    @property
    def terminal(self) -> float:
        return float(self.values[-1])


@dataclass(frozen=True)
class NoiseIncrements:
    """The increments X_1..X_n entering A_n, each with nominal law N(0, dx)."""

    n: int
    x: NDArray[np.float64]
    provenance: Provenance

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64)
        if x.shape != (self.n,):
            raise InvalidInputError(f"Expected {self.n} increments, got shape {x.shape}")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @property
    def dx(self) -> float:
        return 1.0 / (self.n + 1)

    @property
    def xi(self) -> NDArray[np.float64]:
        """Standardized variables xi_i = X_i / sqrt(dx)."""
        return self.x / math.sqrt(self.dx)

    def negated(self) -> NoiseIncrements:
        return NoiseIncrements(self.n, -self.x, self.provenance)

    def scaled(self, factor: float) -> NoiseIncrements:
        return NoiseIncrements(self.n, factor * self.x, self.provenance)


def sample_path(
    seed: int, fine_n: int, scale: float = 1.0, draws: ArrayLike | None = None
) -> BrownianPath:
    """
    Sample a Brownian path on the fine grid t_j = j / fine_n.

    Args:
        seed: 64-bit seed; the path uses stream PATH_STREAM of this seed
        fine_n: Number of fine steps, at least 1
        scale: Multiplier on every increment (0 gives the zero path)
        draws: Standard normal draws Z_0..Z_{fine_n-1} to use instead of the stream

    Returns:
        BrownianPath: B_0 = 0, B_{j+1} = B_j + scale * sqrt(1/fine_n) * Z_j
    """
    if fine_n < 1:
        raise InvalidInputError(f"fine_n must be >= 1, got {fine_n}")
    if draws is None:
        z = normal_stream(seed, PATH_STREAM, fine_n)
    else:
        z = np.asarray(draws, dtype=np.float64)
        if z.shape != (fine_n,):
            raise InvalidInputError(f"Expected {fine_n} forced draws, got shape {z.shape}")
    values = np.empty(fine_n + 1)
    values[0] = 0.0
    np.cumsum(scale * math.sqrt(1.0 / fine_n) * z, out=values[1:])
    return BrownianPath(fine_n, values)


def coarsen(path: BrownianPath, n: int) -> NoiseIncrements:
    """
    Read the increments X_i = B(x_{i+1}) - B(x_i), i = 1..n, off a fine path.

    The increment over the first cell [0, x_1) is not used.

    Raises:
        DivisibilityError: If (n + 1) does not divide path.fine_n
    """
    partition = make_partition(n)
    if path.fine_n % (n + 1) != 0:
        raise DivisibilityError(
            f"fine_n={path.fine_n} is not divisible by n+1={n + 1}; "
            "coupled comparison at this n is impossible on this path",
            fine_n=path.fine_n,
            n=n,
            suggested_fine_n=default_fine_n([n], minimum=path.fine_n),
        )
    stride = path.fine_n // (partition.n + 1)
    nodes = path.values[::stride]
    return NoiseIncrements(n, np.diff(nodes)[1:], Provenance.COUPLED)


def iid_noise(
    seed: int, n: int, scale: float = 1.0, draws: ArrayLike | None = None
) -> NoiseIncrements:
    """
    Draw X_i = scale * sqrt(dx) * Z_i with Z_i i.i.d. standard normal.

    Args:
        seed: 64-bit seed; draws come from stream IID_STREAM of this seed
        n: Number of interior points
        scale: Multiplier on the increments (0 gives the zero-noise hook)
        draws: Standard normal draws to use instead of the stream
    """
    partition = make_partition(n)
    if draws is None:
        z = normal_stream(seed, IID_STREAM, n)
    else:
        z = np.asarray(draws, dtype=np.float64)
        if z.shape != (n,):
            raise InvalidInputError(f"Expected {n} forced draws, got shape {z.shape}")
    return NoiseIncrements(n, scale * math.sqrt(partition.dx) * z, Provenance.IID)


def ito_sum(f_values: ArrayLike, path: BrownianPath) -> float:
    """
    Left-endpoint Ito sum of f against the path: sum_j f(t_j) (B_{j+1} - B_j).

    Args:
        f_values: f at the fine nodes t_0..t_{fine_n-1}
        path: The integrator
    """
    f_values = np.asarray(f_values, dtype=np.float64)
    if f_values.shape != (path.fine_n,):
        raise InvalidInputError(
            f"Ito sum needs {path.fine_n} left-endpoint values, got shape {f_values.shape}"
        )
    return float(np.dot(f_values, path.increments))


def default_fine_n(n_list: list[int] | tuple[int, ...], minimum: int = MIN_FINE_N) -> int:
    """
    Smallest power-of-two multiple of lcm(n+1 for n in n_list) that is >= minimum.

    Example:
        >>> default_fine_n([15, 31, 63, 127])
        65536
    """
    fine_n = math.lcm(*(int(n) + 1 for n in n_list))
    while fine_n < minimum:
        fine_n *= 2
    return fine_n
