"""Run configuration and frozen defaults shared by every command."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from she_spectrum.version import __version__

DEFAULT_BETA = 1.0
DEFAULT_K = 5
DEFAULT_M = 64
DEFAULT_TOL = 1e-9
DEFAULT_SEED = 0
DEFAULT_REPLICAS = 200
DEFAULT_WORKERS = 1

# Smallest fine Brownian grid used when --fine is omitted.
MIN_FINE_N = 2**16

# Monte Carlo slack for the monotone-decrease verdicts.
MSE_SLACK = 0.10
GAP_SLACK = 0.20

QUANTILE_PROBS = (0.05, 0.25, 0.5, 0.75, 0.95)

JACOBI_MAX_SWEEPS = 100

# Largest |g(0)|, |g(1)| still accepted as a vanishing boundary value.
BOUNDARY_TOL = 1e-12

OUTPUT_FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    """Every knob of a single CLI run, echoed verbatim into the output metadata.

    Fields that do not apply to a command stay ``None`` and are still echoed,
    so two output files can be compared key by key.
    """

    command: str
    n: int | None = None
    n_list: tuple[int, ...] | None = None
    beta: float = DEFAULT_BETA
    k: int = DEFAULT_K
    m: int = DEFAULT_M
    fine_n: int | None = None
    replicas: int | None = None
    seed: int = DEFAULT_SEED
    tol: float = DEFAULT_TOL
    out: str | None = None
    format: str = "csv"
    zero_noise: bool = False
    forced_path: str | None = None
    workers: int = DEFAULT_WORKERS
    extra: tuple[tuple[str, object], ...] = ()

    def to_meta(self) -> dict[str, object]:
        """Return the metadata block written ahead of the data section."""
        meta = asdict(self)
        meta["n_list"] = list(self.n_list) if self.n_list is not None else None
        meta["extra"] = dict(self.extra)
        meta["version"] = __version__
        return meta
