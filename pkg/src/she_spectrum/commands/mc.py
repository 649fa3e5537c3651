"""Mc command: Monte Carlo eigenvalue ensembles and their KS distances."""

from pathlib import Path

import click
from rich.progress import Progress, SpinnerColumn, TextColumn

from she_spectrum.commands.common import (
    EXIT_USAGE,
    beta_option,
    console,
    emit,
    fail,
    k_option,
    n_list_option,
    output_options,
    replicas_option,
    seed_option,
    study_errors,
    tol_option,
    workers_option,
    zero_noise_option,
)
from she_spectrum.config import QUANTILE_PROBS, RunConfig
from she_spectrum.tools.stats import ks_distance, monte_carlo_eigen, quantiles
from she_spectrum.tools.validation import is_valid_k

QUANTILE_COLUMNS = tuple(f"q{p:g}" for p in QUANTILE_PROBS)
COLUMNS = ("block", "n", "k_index", *QUANTILE_COLUMNS, "ks_to_largest")


@click.command("mc")
@n_list_option
@beta_option
@k_option
@replicas_option
@seed_option
@tol_option
@workers_option
@output_options
@zero_noise_option
def mc(
    n_list: list[int],
    beta: float,
    k: int,
    replicas: int,
    seed: int,
    tol: float,
    workers: int,
    out: Path | None,
    fmt: str,
    zero_noise: bool,
):
    """
    Sample the laws of the k smallest eigenvalues of -A_n for each n.

    Emits one "quantiles" row per (n, k) and one "ks" row per (n, k) holding
    the two-sample KS distance to the ensemble at the largest n. Replica r
    draws from a stream derived from (--seed, r), so the output does not
    depend on --workers.

    Examples:

        she-spectrum mc --n-list 32,256,512 --k 3 --replicas 1000 --workers 4
    """
    with study_errors():
        is_valid, error_msg = is_valid_k(k, n_list[0])
        if not is_valid:
            fail(error_msg, EXIT_USAGE)

        ensembles = {}
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=console,
            transient=True,
        ) as progress:
            for n in n_list:
                progress.add_task(
                    description=f"Sampling {replicas} replicas at n={n}...", total=None
                )
                ensembles[n] = monte_carlo_eigen(
                    n,
                    beta,
                    k,
                    replicas,
                    seed,
                    tol=tol,
                    workers=workers,
                    noise_scale=0.0 if zero_noise else 1.0,
                )
        console.print(f"[green]✓[/green] Sampled {len(n_list)} ensembles of {replicas} replicas")

        rows = []
        for n in n_list:
            for j, sample in enumerate(ensembles[n], start=1):
                row = {"block": "quantiles", "n": n, "k_index": j}
                row.update(zip(QUANTILE_COLUMNS, map(float, quantiles(sample, QUANTILE_PROBS))))
                rows.append(row)

        largest = ensembles[n_list[-1]]
        for n in n_list:
            for j, sample in enumerate(ensembles[n], start=1):
                distance = ks_distance(sample, largest[j - 1])
                rows.append({"block": "ks", "n": n, "k_index": j, "ks_to_largest": distance})

        config = RunConfig(
            command="mc",
            n_list=tuple(n_list),
            beta=beta,
            k=k,
            replicas=replicas,
            seed=seed,
            tol=tol,
            out=str(out) if out is not None else None,
            format=fmt,
            zero_noise=zero_noise,
            workers=workers,
        )
        emit(rows, COLUMNS, config, out, fmt)
