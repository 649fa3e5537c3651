"""Monte Carlo drivers and the statistics that turn them into verdicts.

"Converges in distribution" is operationalized by two-sample Kolmogorov-
Smirnov distances between eigenvalue ensembles, "in mean square" by averaged
squared gaps between discrete and continuum weak forms, and the pathwise
picture by eigenvalues of coupled discretizations of one Brownian path.

Replicas are independent: replica r of a study seeded with ``seed`` draws
from :func:`derive_seed(seed, r) <she_spectrum.tools.noise.derive_seed>`.
:class:`WorkerMap` preserves replica order, so results are bit-identical for
any number of workers.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Any, TypeVar

import numpy as np
from numpy.typing import ArrayLike, NDArray

from she_spectrum.config import DEFAULT_M, DEFAULT_TOL, GAP_SLACK, MSE_SLACK
from she_spectrum.tools.errors import DivisibilityError, EmptySampleError, InvalidInputError
from she_spectrum.tools.grid import make_partition
from she_spectrum.tools.linalg import eigen_bisect
from she_spectrum.tools.noise import (
    BrownianPath,
    coarsen,
    default_fine_n,
    derive_seed,
    iid_noise,
    sample_path,
)
from she_spectrum.tools.operator import (
    OperatorParams,
    WeakFormVariant,
    assemble_matrix,
    weak_form_continuum,
    weak_form_discrete,
)
from she_spectrum.tools.variational import TrialBasis, ritz_spectrum

T = TypeVar("T")
R = TypeVar("R")


class WorkerMap:
    """Ordered map over replicas; plain ``map`` when workers <= 1, a thread pool otherwise.

    The numba kernels release the GIL, so threads run the eigensolver in parallel.
    """

    def __init__(self, workers: int):
        self.workers = workers
        self.pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    def __enter__(self) -> Callable[[Callable[[T], R], Iterable[T]], Iterator[R]]:
        return map if self.pool is None else self.pool.map

    def __exit__(self, exc_type, exc, tb):
        if self.pool is not None:
            self.pool.shutdown(wait=True)


@dataclass(frozen=True)
class EmpiricalSample:
    """Unordered draws of one statistic plus the parameters that produced them."""

    values: NDArray[np.float64]
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).ravel()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    def sorted(self) -> NDArray[np.float64]:
        return np.sort(self.values)


def _require_nonempty(*samples: EmpiricalSample) -> None:
    for sample in samples:
        if len(sample) == 0:
            raise EmptySampleError("Statistics need a non-empty sample")


def monotone_within_slack(sequence: ArrayLike, slack: float) -> bool:
    """True when each entry is at most (1 + slack) times its predecessor."""
    seq = np.asarray(sequence, dtype=np.float64)
    return bool(np.all(seq[1:] <= seq[:-1] * (1.0 + slack)))


@dataclass(frozen=True)
class ConvergenceReport:
    """A statistic tracked along increasing n, with its verdict flags.

    Attributes:
        n_values: Strictly increasing grid sizes
        statistic: One row per n, one column per tracked quantity (e.g. per k)
        slack: Relative slack of the monotone-decrease verdict
        tracked: "statistic" judges the statistic itself, "gaps" judges
            |statistic(n_{j+1}) - statistic(n_j)|
        reference: Optional per-column reference values (e.g. Ritz estimates)
    """

    n_values: tuple[int, ...]
    statistic: NDArray[np.float64]
    slack: float
    tracked: str = "statistic"
    reference: NDArray[np.float64] | None = None

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.n_values, self.n_values[1:])):
            raise InvalidInputError(f"n values must be strictly increasing, got {self.n_values}")
        statistic = np.array(self.statistic, dtype=np.float64)
        if statistic.ndim == 1:
            statistic = statistic[:, None]
        if statistic.shape[0] != len(self.n_values):
            raise InvalidInputError(
                f"Expected {len(self.n_values)} statistic rows, got {statistic.shape[0]}"
            )
        if self.tracked not in ("statistic", "gaps"):
            raise InvalidInputError(f"Unknown tracked quantity {self.tracked!r}")
        statistic.setflags(write=False)
        object.__setattr__(self, "statistic", statistic)

    @property
    def gaps(self) -> NDArray[np.float64]:
        """|statistic(n_{j+1}) - statistic(n_j)|, one row fewer than n_values."""
        return np.abs(np.diff(self.statistic, axis=0))

    @property
    def trend(self) -> NDArray[np.float64]:
        return self.statistic if self.tracked == "statistic" else self.gaps

    @property
    def monotone(self) -> tuple[bool, ...]:
        """Per column: does the tracked sequence decrease within slack."""
        trend = self.trend
        return tuple(monotone_within_slack(trend[:, c], self.slack) for c in range(trend.shape[1]))

    @property
    def final_gap(self) -> tuple[float | None, ...]:
        """Per column: the last gap, or None for a single n."""
        gaps = self.gaps
        if gaps.shape[0] == 0:
            return tuple(None for _ in range(self.statistic.shape[1]))
        return tuple(float(g) for g in gaps[-1])

    def step_flags(self, column: int = 0) -> list[bool | None]:
        """Per row: did the tracked sequence stay within slack of its predecessor."""
        trend = self.trend[:, column]
        if trend.size == 0:
            return [None] * len(self.n_values)
        flags: list[bool | None] = [None] * (len(self.n_values) - trend.size + 1)
        for j in range(1, trend.size):
            flags.append(bool(trend[j] <= trend[j - 1] * (1.0 + self.slack)))
        return flags


def _replica_eigenvalues(
    r: int, seed: int, params: OperatorParams, k: int, tol: float, noise_scale: float
) -> NDArray[np.float64]:
    noise = iid_noise(derive_seed(seed, r), params.n, scale=noise_scale)
    spectrum = eigen_bisect(assemble_matrix(params, noise).negated(), (1, k), tol)
    return spectrum.eigenvalues


def monte_carlo_eigen(
    n: int,
    beta: float,
    k: int,
    replicas: int,
    seed: int,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
    noise_scale: float = 1.0,
) -> tuple[EmpiricalSample, ...]:
    """
    Ensembles of the k smallest eigenvalues of -A_n over independent replicas.

    Returns:
        tuple[EmpiricalSample, ...]: One sample per index 1..k, replica order preserved

    Raises:
        InvalidInputError: If k > n or replicas < 1
    """
    params = OperatorParams(beta, n)
    if not 1 <= k <= n:
        raise InvalidInputError(f"Need 1 <= k <= n, got k={k}, n={n}")
    if replicas < 1:
        raise InvalidInputError(f"replicas must be >= 1, got {replicas}")
    task = partial(
        _replica_eigenvalues, seed=seed, params=params, k=k, tol=tol, noise_scale=noise_scale
    )
    with WorkerMap(workers) as map_function:
        rows = np.array(list(map_function(task, range(replicas))))
    return tuple(
        EmpiricalSample(
            rows[:, j],
            {"n": n, "beta": beta, "k": j + 1, "seeds": (seed, replicas)},
        )
        for j in range(k)
    )


def ks_distance(a: EmpiricalSample, b: EmpiricalSample) -> float:
    """
    sup_x |ECDF_a(x) - ECDF_b(x)|, evaluated exactly at every pooled breakpoint.

    Example:
        >>> ks_distance(EmpiricalSample([1.0, 2.0]), EmpiricalSample([1.5, 2.5]))
        0.5
    """
    _require_nonempty(a, b)
    sa, sb = a.sorted(), b.sorted()
    pooled = np.concatenate((sa, sb))
    cdf_a = np.searchsorted(sa, pooled, side="right") / sa.size
    cdf_b = np.searchsorted(sb, pooled, side="right") / sb.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def quantiles(sample: EmpiricalSample, probs: Sequence[float]) -> NDArray[np.float64]:
    """
    Order-statistic quantiles, linearly interpolated between neighbours.

    Raises:
        InvalidInputError: If a probability lies outside [0, 1]
        EmptySampleError: If the sample is empty
    """
    _require_nonempty(sample)
    probs = np.asarray(probs, dtype=np.float64)
    if np.any((probs < 0.0) | (probs > 1.0)):
        raise InvalidInputError(f"Probabilities must lie in [0, 1], got {probs.tolist()}")
    return np.quantile(sample.values, probs, method="linear")


def _check_coupling(n_list: Sequence[int], fine_n: int) -> None:
    bad = [n for n in n_list if fine_n % (n + 1) != 0]
    if bad:
        raise DivisibilityError(
            f"fine_n={fine_n} is not divisible by n+1 for n in {bad}",
            fine_n=fine_n,
            n=bad[0],
            suggested_fine_n=default_fine_n(n_list, minimum=fine_n),
        )


def _check_forced_scale(path: BrownianPath | None, noise_scale: float) -> None:
    if path is not None and noise_scale != 1.0:
        raise InvalidInputError(
            f"A forced path is used as given; noise_scale must stay 1, got {noise_scale!r}"
        )


def _check_ascending(n_list: Sequence[int]) -> None:
    if len(n_list) == 0:
        raise InvalidInputError("n_list must not be empty")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise InvalidInputError(f"n_list must be strictly ascending, got {list(n_list)}")
    for n in n_list:
        make_partition(n)


def _replica_squared_gaps(
    r: int,
    seed: int,
    n_list: Sequence[int],
    fine_n: int,
    beta: float,
    u_mode: int,
    v_mode: int,
    noise_scale: float,
    path: BrownianPath | None,
) -> NDArray[np.float64]:
    if path is None:
        path = sample_path(derive_seed(seed, r), fine_n, scale=noise_scale)
    basis = TrialBasis.sine(max(u_mode, v_mode))
    t = path.times
    values, slopes = basis.values(t), basis.derivative_values(t)
    u, du = values[u_mode - 1], slopes[u_mode - 1]
    v, dv = values[v_mode - 1], slopes[v_mode - 1]
    u[-1] = v[-1] = 0.0
    continuum = weak_form_continuum(u, du, v, dv, beta, path, WeakFormVariant.ITO)
    gaps = np.empty(len(n_list))
    for j, n in enumerate(n_list):
        partition = make_partition(n)
        nodes = basis.values(partition.points)
        nodes[:, -1] = 0.0
        discrete = weak_form_discrete(
            nodes[u_mode - 1], nodes[v_mode - 1], OperatorParams(beta, n), coarsen(path, n)
        )
        gaps[j] = (discrete - continuum) ** 2
    return gaps


def mse_weakform(
    n_list: Sequence[int],
    replicas: int,
    fine_n: int,
    seed: int,
    u_mode: int = 1,
    v_mode: int = 1,
    beta: float = 1.0,
    workers: int = 1,
    noise_scale: float = 1.0,
    slack: float = MSE_SLACK,
    path: BrownianPath | None = None,
) -> ConvergenceReport:
    """
    Mean-square gap between <L_n u, v> and <L u, v> along n, with coupled noise.

    Each replica samples one path; every n reads its increments off that path.
    u and v are the sine modes e_{u_mode}, e_{v_mode}. A forced ``path`` is
    shared by all replicas.

    Raises:
        DivisibilityError: If some (n + 1) does not divide fine_n
        InvalidInputError: If a forced path is combined with noise_scale != 1
    """
    _check_ascending(n_list)
    if replicas < 1:
        raise InvalidInputError(f"replicas must be >= 1, got {replicas}")
    if u_mode < 1 or v_mode < 1:
        raise InvalidInputError(f"Mode selectors start at 1, got u={u_mode}, v={v_mode}")
    _check_forced_scale(path, noise_scale)
    if path is not None:
        fine_n = path.fine_n
    _check_coupling(n_list, fine_n)
    task = partial(
        _replica_squared_gaps,
        seed=seed,
        n_list=tuple(n_list),
        fine_n=fine_n,
        beta=beta,
        u_mode=u_mode,
        v_mode=v_mode,
        noise_scale=noise_scale,
        path=path,
    )
    with WorkerMap(workers) as map_function:
        rows = np.array(list(map_function(task, range(replicas))))
    return ConvergenceReport(tuple(n_list), rows.mean(axis=0), slack)


def coupled_eigen_study(
    n_list: Sequence[int],
    fine_n: int,
    seed: int,
    k: int,
    m: int = DEFAULT_M,
    tol: float = DEFAULT_TOL,
    noise_scale: float = 1.0,
    slack: float = GAP_SLACK,
    path: BrownianPath | None = None,
) -> ConvergenceReport:
    """
    Eigenvalues of -A_n for every n, all built from one Brownian path.

    Matrices use the negated coarsened increments, so that -A_n(-X) is the
    min-max of F_n with the same X that F integrates against. The report
    tracks the successive gaps per index and carries ritz_spectrum(m, path, k)
    as reference.

    Raises:
        DivisibilityError: If some (n + 1) does not divide fine_n
        InvalidInputError: If a forced path is combined with noise_scale != 1
    """
    _check_ascending(n_list)
    if not 1 <= k <= min(n_list):
        raise InvalidInputError(f"Need 1 <= k <= min(n_list), got k={k}")
    _check_forced_scale(path, noise_scale)
    if path is None:
        path = sample_path(seed, fine_n, scale=noise_scale)
    _check_coupling(n_list, path.fine_n)
    rows = []
    for n in n_list:
        noise = coarsen(path, n).negated()
        T = assemble_matrix(OperatorParams(1.0, n), noise).negated()
        rows.append(eigen_bisect(T, (1, k), tol).eigenvalues)
    reference = ritz_spectrum(max(m, k), path, k, tol).eigenvalues
    return ConvergenceReport(tuple(n_list), np.array(rows), slack, "gaps", reference)
