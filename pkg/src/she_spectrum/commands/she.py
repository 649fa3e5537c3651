"""She command: explicit-Euler trajectories of the stochastic heat equation."""

import math
from pathlib import Path

import click
import numpy as np

from she_spectrum.commands.common import (
    EXIT_PRECONDITION,
    beta_option,
    console,
    emit,
    fail,
    output_options,
    seed_option,
    study_errors,
    zero_noise_option,
)
from she_spectrum.config import RunConfig
from she_spectrum.tools.grid import make_partition
from she_spectrum.tools.operator import OperatorParams, max_stable_dt, simulate_she
from she_spectrum.tools.validation import check_time_step

COLUMNS = ("t", "x", "u", "l2_norm")

# Default step as a fraction of the stability bound.
DEFAULT_DT_FRACTION = 0.5
DEFAULT_SNAPSHOTS = 10


@click.command("she")
@click.option(
    "--n", type=click.IntRange(min=1), default=128, show_default=True, help="Interior points"
)
@beta_option
@click.option(
    "--dt",
    type=click.FloatRange(min=0.0, min_open=True),
    default=None,
    help="Time step (default: half the stability bound)",
)
@click.option(
    "--t-end",
    type=click.FloatRange(min=0.0, min_open=True),
    default=0.1,
    show_default=True,
    help="Final time",
)
@click.option(
    "--stride",
    type=click.IntRange(min=1),
    default=None,
    help=f"Record every STRIDE-th step (default: about {DEFAULT_SNAPSHOTS} snapshots)",
)
@click.option(
    "--initial",
    type=click.Choice(["sine", "zero"]),
    default="sine",
    show_default=True,
    help="Initial data: sin(pi x) or 0",
)
@click.option("--noise/--no-noise", default=True, show_default=True, help="Space-time noise")
@seed_option
@output_options
@zero_noise_option
def she(
    n: int,
    beta: float,
    dt: float | None,
    t_end: float,
    stride: int | None,
    initial: str,
    noise: bool,
    seed: int,
    out: Path | None,
    fmt: str,
    zero_noise: bool,
):
    """
    Integrate u_t = beta u_xx + u w' with zero boundary values.

    Emits one row per (snapshot, interior node) with the snapshot's discrete
    L2 norm. The number of steps is ceil(t_end / dt), with the step shrunk so
    the last snapshot lands exactly on t_end.

    Examples:

        she-spectrum she --n 128 --t-end 0.1 --no-noise

        she-spectrum she --n 64 --dt 1e-5 --stride 100 --seed 3
    """
    with study_errors():
        params = OperatorParams(beta, n)
        if dt is None:
            dt = DEFAULT_DT_FRACTION * max_stable_dt(params)
        is_valid, error_msg = check_time_step(dt, beta, n)
        if not is_valid:
            fail(error_msg, EXIT_PRECONDITION)

        steps = max(1, math.ceil(t_end / dt))
        step = min(t_end / steps, dt)
        if stride is None:
            stride = max(1, steps // DEFAULT_SNAPSHOTS)

        partition = make_partition(n)
        if initial == "sine":
            u0 = np.sin(np.pi * partition.interior)
        else:
            u0 = np.zeros(n)

        noise_on = noise and not zero_noise
        states = simulate_she(u0, params, step, steps, seed, noise_on=noise_on, stride=stride)
        console.print(
            f"[green]✓[/green] Ran {steps} steps of dt={step:.3e}, {len(states)} snapshots"
        )

        rows = [
            {"t": state.t, "x": float(x), "u": float(u), "l2_norm": state.l2_norm}
            for state in states
            for x, u in zip(partition.interior, state.u)
        ]
        config = RunConfig(
            command="she",
            n=n,
            beta=beta,
            seed=seed,
            out=str(out) if out is not None else None,
            format=fmt,
            zero_noise=zero_noise,
            extra=(
                ("dt", step),
                ("steps", steps),
                ("t_end", t_end),
                ("stride", stride),
                ("initial", initial),
                ("noise", noise_on),
            ),
        )
        emit(rows, COLUMNS, config, out, fmt)
