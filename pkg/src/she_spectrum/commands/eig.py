"""Eig command: the k extreme eigenvalues of one random matrix A_n."""

from pathlib import Path

import click

from she_spectrum.commands.common import (
    EXIT_USAGE,
    beta_option,
    check_noise_source,
    console,
    emit,
    fail,
    forced_path_option,
    k_option,
    n_option,
    output_options,
    seed_option,
    study_errors,
    tol_option,
    zero_noise_option,
)
from she_spectrum.config import RunConfig
from she_spectrum.tools.filesystem import read_forced_path
from she_spectrum.tools.linalg import eigen_bisect
from she_spectrum.tools.noise import coarsen, iid_noise
from she_spectrum.tools.operator import OperatorParams, assemble_matrix
from she_spectrum.tools.validation import is_valid_k

COLUMNS = ("k_index", "eig_A", "eig_negA")


@click.command("eig")
@n_option
@beta_option
@k_option
@seed_option
@tol_option
@output_options
@zero_noise_option
@forced_path_option
def eig(
    n: int,
    beta: float,
    k: int,
    seed: int,
    tol: float,
    out: Path | None,
    fmt: str,
    zero_noise: bool,
    forced_path: Path | None,
):
    """
    Compute k eigenvalues of A_n and of -A_n for one noise draw.

    Row j holds the j-th largest eigenvalue of A_n and the j-th smallest of
    -A_n. The noise is i.i.d. from --seed, or read off a forced Brownian path.

    Examples:

        she-spectrum eig --n 1023 --k 5 --seed 7

        she-spectrum eig --n 3 --k 3 --zero-noise --format json
    """
    with study_errors():
        check_noise_source(zero_noise, forced_path)
        is_valid, error_msg = is_valid_k(k, n)
        if not is_valid:
            fail(error_msg, EXIT_USAGE)

        if forced_path is not None:
            path = read_forced_path(forced_path)
            console.print(f"[green]✓[/green] Loaded forced path with fine_n={path.fine_n}")
            noise = coarsen(path, n)
        else:
            noise = iid_noise(seed, n, scale=0.0 if zero_noise else 1.0)

        A = assemble_matrix(OperatorParams(beta, n), noise)
        top = eigen_bisect(A, (n - k + 1, n), tol).eigenvalues[::-1]
        bottom = eigen_bisect(A.negated(), (1, k), tol).eigenvalues

        rows = [
            {"k_index": j + 1, "eig_A": float(top[j]), "eig_negA": float(bottom[j])}
            for j in range(k)
        ]
        config = RunConfig(
            command="eig",
            n=n,
            beta=beta,
            k=k,
            seed=seed,
            tol=tol,
            out=str(out) if out is not None else None,
            format=fmt,
            zero_noise=zero_noise,
            forced_path=str(forced_path) if forced_path is not None else None,
            fine_n=path.fine_n if forced_path is not None else None,
        )
        emit(rows, COLUMNS, config, out, fmt)
