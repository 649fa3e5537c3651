"""Options, error mapping and output shared by the study commands."""

import sys
from collections.abc import Callable, Iterator, Mapping, Sequence
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import click
from rich.console import Console

from she_spectrum.config import (
    DEFAULT_BETA,
    DEFAULT_K,
    DEFAULT_REPLICAS,
    DEFAULT_SEED,
    DEFAULT_TOL,
    DEFAULT_WORKERS,
    OUTPUT_FORMATS,
    RunConfig,
)
from she_spectrum.tools.errors import (
    DivisibilityError,
    InvalidInputError,
    PreconditionError,
)
from she_spectrum.tools.filesystem import get_relative_path, write_table
from she_spectrum.tools.validation import parse_n_list

console = Console(stderr=True)

EXIT_USAGE = 2
EXIT_PRECONDITION = 3
EXIT_IO = 4
EXIT_INTERRUPTED = 130


def _n_list_callback(ctx: click.Context, param: click.Parameter, value: str | None):
    if value is None:
        return None
    n_list, error_msg = parse_n_list(value)
    if n_list is None:
        raise click.BadParameter(error_msg)
    return n_list


def n_option(func: Callable) -> Callable:
    return click.option(
        "--n",
        type=click.IntRange(min=1),
        required=True,
        help="Number of interior grid points",
    )(func)


def n_list_option(func: Callable) -> Callable:
    return click.option(
        "--n-list",
        "n_list",
        required=True,
        callback=_n_list_callback,
        help="Strictly ascending grid sizes, comma separated (e.g. 127,255,511)",
    )(func)


def beta_option(func: Callable) -> Callable:
    return click.option(
        "--beta",
        type=click.FloatRange(min=0.0, min_open=True),
        default=DEFAULT_BETA,
        show_default=True,
        help="Diffusion coefficient",
    )(func)


def k_option(func: Callable) -> Callable:
    return click.option(
        "--k",
        type=click.IntRange(min=1),
        default=DEFAULT_K,
        show_default=True,
        help="Number of eigenvalues",
    )(func)


def fine_option(func: Callable) -> Callable:
    return click.option(
        "--fine",
        "fine_n",
        type=click.IntRange(min=1),
        default=None,
        help="Fine Brownian grid size (default: power-of-two multiple of lcm(n+1), >= 65536)",
    )(func)


def replicas_option(func: Callable) -> Callable:
    return click.option(
        "--replicas",
        type=click.IntRange(min=1),
        default=DEFAULT_REPLICAS,
        show_default=True,
        help="Number of independent Monte Carlo replicas",
    )(func)


def workers_option(func: Callable) -> Callable:
    return click.option(
        "--workers",
        type=click.IntRange(min=1),
        default=DEFAULT_WORKERS,
        show_default=True,
        help="Concurrent replica workers (results do not depend on this)",
    )(func)


def seed_option(func: Callable) -> Callable:
    return click.option(
        "--seed",
        type=click.IntRange(min=0, max=2**64 - 1),
        default=DEFAULT_SEED,
        show_default=True,
        help="64-bit seed of every random stream",
    )(func)


def tol_option(func: Callable) -> Callable:
    return click.option(
        "--tol",
        type=click.FloatRange(min=0.0, min_open=True),
        default=DEFAULT_TOL,
        show_default=True,
        help="Eigenvalue tolerance",
    )(func)


def output_options(func: Callable) -> Callable:
    """--out and --format; data goes to stdout when --out is omitted."""
    func = click.option(
        "--format",
        "fmt",
        type=click.Choice(OUTPUT_FORMATS),
        default="csv",
        show_default=True,
        help="Output format",
    )(func)
    return click.option(
        "--out",
        type=click.Path(dir_okay=False, path_type=Path),
        default=None,
        help="Output file (default: stdout)",
    )(func)


def zero_noise_option(func: Callable) -> Callable:
    return click.option(
        "--zero-noise",
        is_flag=True,
        default=False,
        hidden=True,
        help="Replace every Gaussian draw by 0",
    )(func)


def forced_path_option(func: Callable) -> Callable:
    return click.option(
        "--forced-path",
        type=click.Path(dir_okay=False, path_type=Path),
        default=None,
        hidden=True,
        help="File with fine Brownian values B_0..B_fine, one per line (not with --zero-noise)",
    )(func)


def fail(message: str, code: int) -> None:
    console.print(f"[red]✗[/red] {message}")
    sys.exit(code)


def check_noise_source(zero_noise: bool, forced_path: Path | None) -> None:
    """A forced path is used as given, so it cannot be combined with --zero-noise."""
    if zero_noise and forced_path is not None:
        fail("--zero-noise cannot be combined with --forced-path", EXIT_USAGE)


@contextmanager
def study_errors() -> Iterator[None]:
    """Map library exceptions onto exit codes: 2 usage, 3 precondition, 4 I/O, 130 interrupt."""
    try:
        yield
    except click.ClickException:
        raise
    except KeyboardInterrupt:
        console.print("\n[yellow]⚠[/yellow] Operation cancelled by user")
        sys.exit(EXIT_INTERRUPTED)
    except DivisibilityError as e:
        message = str(e)
        if e.suggested_fine_n is not None:
            message += f"\nUse e.g. --fine {e.suggested_fine_n}"
        fail(message, EXIT_PRECONDITION)
    except PreconditionError as e:
        fail(str(e), EXIT_PRECONDITION)
    except InvalidInputError as e:
        fail(str(e), EXIT_USAGE)
    except OSError as e:
        fail(f"I/O error: {e}", EXIT_IO)
    except Exception as e:
        console.print(f"\n[red]✗[/red] Unexpected error: {e}")
        sys.exit(1)


def emit(
    rows: Sequence[Mapping[str, Any]],
    columns: Sequence[str],
    config: RunConfig,
    out: Path | None,
    fmt: str,
) -> None:
    """Write the result table once, to ``out`` or to stdout."""
    text = write_table(rows, columns, config.to_meta(), out, fmt)
    if out is None:
        click.echo(text, nl=False)
    else:
        console.print(f"[green]✓[/green] Wrote {len(rows)} rows to {get_relative_path(out)}")
