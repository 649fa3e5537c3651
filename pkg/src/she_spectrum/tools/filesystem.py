"""Filesystem utilities: result tables and forced-path files."""

import csv
import io
import json
import math
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from rich.console import Console

from she_spectrum.tools.errors import InvalidInputError
from she_spectrum.tools.noise import BrownianPath

console = Console(stderr=True)


def ensure_directory_exists(path: Path, create: bool = False) -> bool:
    """
    Check if a directory exists, optionally creating it.

    Args:
        path: The directory path to check
        create: Whether to create the directory if it doesn't exist

    Returns:
        bool: True if directory exists (or was created), False otherwise
    """
    if path.exists():
        return path.is_dir()

    if create:
        try:
            path.mkdir(parents=True, exist_ok=True)
            return True
        except OSError as e:
            console.print(f"[red]✗[/red] Failed to create directory {path}: {e}")
            return False

    return False


def format_value(value: Any) -> str:
    """
    Render one table cell: shortest round-trip repr for floats, empty for None.

    Examples:
        >>> format_value(0.1)
        '0.1'
        >>> format_value(None)
        ''
    """
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _plain(value: Any) -> Any:
    """Convert numpy scalars, arrays and tuples into JSON-native values."""
    if isinstance(value, Mapping):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(item) for item in value]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    return value


def render_table(
    rows: Sequence[Mapping[str, Any]],
    columns: Sequence[str],
    meta: Mapping[str, Any],
    fmt: str = "csv",
) -> str:
    """
    Render a result table with its metadata block.

    CSV output starts with one ``# key: value`` comment line per metadata key
    (values JSON-encoded), then a header row and one line per row. JSON output
    is a single object ``{"meta": {...}, "rows": [...]}``.

    Args:
        rows: One mapping per row, keyed by column name
        columns: Column order
        meta: Metadata echoed ahead of the data
        fmt: "csv" or "json"

    Returns:
        str: The rendered document, newline-terminated
    """
    if fmt == "json":
        document = {
            "meta": _plain(meta),
            "rows": [{column: _plain(row.get(column)) for column in columns} for row in rows],
        }
        return json.dumps(document, indent=2) + "\n"
    if fmt != "csv":
        raise InvalidInputError(f"Unknown output format {fmt!r}")

    buffer = io.StringIO()
    for key, value in meta.items():
        buffer.write(f"# {key}: {json.dumps(_plain(value))}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(column)) for column in columns])
    return buffer.getvalue()


def write_table(
    rows: Sequence[Mapping[str, Any]],
    columns: Sequence[str],
    meta: Mapping[str, Any],
    out: Path | None,
    fmt: str = "csv",
) -> str:
    """
    Render a table and write it to ``out``, or return it for stdout when ``out`` is None.

    Raises:
        OSError: If the output directory cannot be created or the file written
    """
    text = render_table(rows, columns, meta, fmt)
    if out is not None:
        if not ensure_directory_exists(out.parent, create=True):
            raise OSError(f"Output directory is not usable: {out.parent}")
        out.write_text(text, encoding="utf-8")
    return text


def read_forced_path(path: Path) -> BrownianPath:
    """
    Read a forced Brownian path: one real per line, B_0..B_{fine_n}, B_0 = 0.

    Raises:
        OSError: If the file cannot be read
        InvalidInputError: If the contents are not a valid path
    """
    text = path.read_text(encoding="utf-8")
    try:
        values = np.loadtxt(io.StringIO(text), dtype=np.float64, ndmin=1)
    except ValueError as e:
        raise InvalidInputError(f"Forced path {path} is not a column of reals: {e}") from e
    if not np.all(np.isfinite(values)):
        raise InvalidInputError(f"Forced path {path} contains non-finite values")
    return BrownianPath.from_values(values)


def get_relative_path(path: Path, base: Path | None = None) -> str:
    """
    Get a relative path string for display purposes.

    Args:
        path: The path to convert
        base: Base path for relative calculation (defaults to current directory)

    Returns:
        str: Relative path string, or absolute if relative calculation fails
    """
    if base is None:
        base = Path.cwd()

    try:
        return str(path.relative_to(base))
    except ValueError:
        return str(path)
