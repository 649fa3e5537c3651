"""Converge command: eigenvalues of coupled discretizations of one Brownian path."""

from pathlib import Path

import click

from she_spectrum.commands.common import (
    EXIT_PRECONDITION,
    EXIT_USAGE,
    check_noise_source,
    console,
    emit,
    fail,
    fine_option,
    forced_path_option,
    k_option,
    n_list_option,
    output_options,
    seed_option,
    study_errors,
    tol_option,
    zero_noise_option,
)
from she_spectrum.config import DEFAULT_M, RunConfig
from she_spectrum.tools.filesystem import read_forced_path
from she_spectrum.tools.noise import default_fine_n
from she_spectrum.tools.stats import coupled_eigen_study
from she_spectrum.tools.validation import check_divisibility, is_valid_k

COLUMNS = ("n", "k_index", "eigenvalue", "gap_to_prev", "ritz_reference")


@click.command("converge")
@n_list_option
@k_option
@click.option(
    "--m",
    type=click.IntRange(min=1),
    default=DEFAULT_M,
    show_default=True,
    help="Sine modes in the Rayleigh-Ritz reference",
)
@fine_option
@seed_option
@tol_option
@output_options
@zero_noise_option
@forced_path_option
def converge(
    n_list: list[int],
    k: int,
    m: int,
    fine_n: int | None,
    seed: int,
    tol: float,
    out: Path | None,
    fmt: str,
    zero_noise: bool,
    forced_path: Path | None,
):
    """
    Track the k smallest eigenvalues of -A_n along n on one Brownian path.

    Every matrix reads its noise off the same fine path, so the gaps between
    successive n show pathwise convergence. A Rayleigh-Ritz estimate on the
    first m sine modes of the same path is reported as reference.

    Examples:

        she-spectrum converge --n-list 127,255,511,1023 --k 3 --seed 11

        she-spectrum converge --n-list 15,31 --fine 4096 --format json
    """
    with study_errors():
        check_noise_source(zero_noise, forced_path)
        is_valid, error_msg = is_valid_k(k, n_list[0])
        if not is_valid:
            fail(error_msg, EXIT_USAGE)

        path = None
        if forced_path is not None:
            path = read_forced_path(forced_path)
            console.print(f"[green]✓[/green] Loaded forced path with fine_n={path.fine_n}")
            fine_n = path.fine_n
        elif fine_n is None:
            fine_n = default_fine_n(n_list)

        is_valid, error_msg = check_divisibility(fine_n, n_list)
        if not is_valid:
            fail(error_msg, EXIT_PRECONDITION)

        report = coupled_eigen_study(
            n_list,
            fine_n,
            seed,
            k,
            m=m,
            tol=tol,
            noise_scale=0.0 if zero_noise else 1.0,
            path=path,
        )

        rows = []
        for row, n in enumerate(report.n_values):
            for j in range(k):
                gap = report.gaps[row - 1, j] if row > 0 else None
                rows.append(
                    {
                        "n": n,
                        "k_index": j + 1,
                        "eigenvalue": float(report.statistic[row, j]),
                        "gap_to_prev": None if gap is None else float(gap),
                        "ritz_reference": float(report.reference[j]),
                    }
                )

        for j, monotone in enumerate(report.monotone, start=1):
            if not monotone:
                console.print(f"[yellow]⚠[/yellow] Gaps of lambda_{j} are not decreasing")

        config = RunConfig(
            command="converge",
            n_list=tuple(n_list),
            k=k,
            m=m,
            fine_n=fine_n,
            seed=seed,
            tol=tol,
            out=str(out) if out is not None else None,
            format=fmt,
            zero_noise=zero_noise,
            forced_path=str(forced_path) if forced_path is not None else None,
        )
        emit(rows, COLUMNS, config, out, fmt)
