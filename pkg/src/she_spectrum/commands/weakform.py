"""Weakform command: mean-square gap between discrete and continuum weak forms."""

from pathlib import Path

import click
from rich.progress import Progress, SpinnerColumn, TextColumn

from she_spectrum.commands.common import (
    EXIT_PRECONDITION,
    beta_option,
    check_noise_source,
    console,
    emit,
    fail,
    fine_option,
    forced_path_option,
    n_list_option,
    output_options,
    replicas_option,
    seed_option,
    study_errors,
    workers_option,
    zero_noise_option,
)
from she_spectrum.config import MSE_SLACK, RunConfig
from she_spectrum.tools.filesystem import read_forced_path
from she_spectrum.tools.noise import default_fine_n
from she_spectrum.tools.stats import mse_weakform
from she_spectrum.tools.validation import check_divisibility

COLUMNS = ("n", "mse", "monotone_flag")


@click.command("weakform")
@n_list_option
@click.option(
    "--u-mode",
    type=click.IntRange(min=1),
    default=1,
    show_default=True,
    help="u = sqrt(2) sin(j pi x) for this j",
)
@click.option(
    "--v-mode",
    type=click.IntRange(min=1),
    default=1,
    show_default=True,
    help="v = sqrt(2) sin(j pi x) for this j",
)
@beta_option
@fine_option
@replicas_option
@seed_option
@workers_option
@output_options
@zero_noise_option
@forced_path_option
def weakform(
    n_list: list[int],
    u_mode: int,
    v_mode: int,
    beta: float,
    fine_n: int | None,
    replicas: int,
    seed: int,
    workers: int,
    out: Path | None,
    fmt: str,
    zero_noise: bool,
    forced_path: Path | None,
):
    """
    Estimate E[(<L_n u, v> - <L u, v>)^2] along n.

    Each replica samples one Brownian path on the fine grid and evaluates
    every n against it. monotone_flag marks rows whose estimate stays within
    10% of the previous row.

    Examples:

        she-spectrum weakform --n-list 15,31,63,127 --replicas 500

        she-spectrum weakform --n-list 15,31 --u-mode 1 --v-mode 2 --fine 8192
    """
    with study_errors():
        check_noise_source(zero_noise, forced_path)
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

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=console,
            transient=True,
        ) as progress:
            progress.add_task(description=f"Running {replicas} replicas...", total=None)
            report = mse_weakform(
                n_list,
                replicas,
                fine_n,
                seed,
                u_mode=u_mode,
                v_mode=v_mode,
                beta=beta,
                workers=workers,
                noise_scale=0.0 if zero_noise else 1.0,
                slack=MSE_SLACK,
                path=path,
            )
        if not report.monotone[0]:
            console.print("[yellow]⚠[/yellow] MSE is not decreasing within slack")

        # The first row has no predecessor and is flagged true.
        rows = [
            {"n": n, "mse": float(report.statistic[row, 0]), "monotone_flag": flag is not False}
            for row, (n, flag) in enumerate(zip(report.n_values, report.step_flags()))
        ]
        config = RunConfig(
            command="weakform",
            n_list=tuple(n_list),
            beta=beta,
            fine_n=fine_n,
            replicas=replicas,
            seed=seed,
            out=str(out) if out is not None else None,
            format=fmt,
            zero_noise=zero_noise,
            forced_path=str(forced_path) if forced_path is not None else None,
            workers=workers,
            extra=(("u_mode", u_mode), ("v_mode", v_mode)),
        )
        emit(rows, COLUMNS, config, out, fmt)
