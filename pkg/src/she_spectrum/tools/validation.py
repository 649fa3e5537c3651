"""Validation utilities for command-line parameters."""

import math

from she_spectrum.tools.noise import default_fine_n


def parse_n_list(text: str) -> tuple[list[int] | None, str]:
    """
    Parse a comma-separated list of grid sizes.

    Args:
        text: Value of an --n-list flag, e.g. "15,31,63"

    Returns:
        tuple: (n_list, error_message)
               n_list is the parsed list if valid, None otherwise
               error_message is empty string if valid, otherwise contains error description

    Examples:
        >>> parse_n_list("15,31,63")
        ([15, 31, 63], '')
        >>> parse_n_list("15,x")
        (None, "Invalid grid size 'x' in n-list (expected an integer)")
    """
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        return None, "n-list cannot be empty"

    n_list = []
    for item in items:
        try:
            n_list.append(int(item))
        except ValueError:
            return None, f"Invalid grid size '{item}' in n-list (expected an integer)"

    is_valid, message = is_valid_n_list(n_list)
    if not is_valid:
        return None, message
    return n_list, ""


def is_valid_n(n: int) -> tuple[bool, str]:
    """
    Validate the number of interior grid points.

    Returns:
        tuple: (is_valid, error_message)
    """
    if n < 1:
        return False, f"Grid size must be at least 1, got {n}"
    return True, ""


def is_valid_n_list(n_list: list[int]) -> tuple[bool, str]:
    """
    Validate a list of grid sizes: each at least 1 and strictly ascending.

    Examples:
        >>> is_valid_n_list([15, 31])
        (True, '')
        >>> is_valid_n_list([31, 15])
        (False, 'n-list must be strictly ascending, got [31, 15]')
    """
    if not n_list:
        return False, "n-list cannot be empty"
    for n in n_list:
        is_valid, message = is_valid_n(n)
        if not is_valid:
            return False, message
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        return False, f"n-list must be strictly ascending, got {n_list}"
    return True, ""


def is_valid_k(k: int, n: int) -> tuple[bool, str]:
    """Validate the number of requested eigenvalues against the grid size."""
    if k < 1:
        return False, f"k must be at least 1, got {k}"
    if k > n:
        return False, f"k={k} exceeds the matrix size n={n}"
    return True, ""


def check_divisibility(fine_n: int, n_list: list[int]) -> tuple[bool, str]:
    """
    Check that every (n + 1) divides fine_n, suggesting a compatible fine_n if not.

    Examples:
        >>> check_divisibility(65536, [15, 31])
        (True, '')
        >>> check_divisibility(1000, [15])[0]
        False
    """
    bad = [n for n in n_list if fine_n % (n + 1) != 0]
    if not bad:
        return True, ""
    suggestion = default_fine_n(n_list, minimum=fine_n)
    return False, (
        f"--fine {fine_n} is not divisible by n+1 for n in {bad}\n"
        f"Use a multiple of {math.lcm(*(n + 1 for n in n_list))}, e.g. --fine {suggestion}"
    )


def check_time_step(dt: float, beta: float, n: int) -> tuple[bool, str]:
    """
    Check the explicit-Euler stability bound dt <= dx^2 / (2 beta).

    Returns:
        tuple: (is_valid, error_message); the message names the admissible bound
    """
    bound = (1.0 / (n + 1)) ** 2 / (2.0 * beta)
    if not 0 < dt <= bound:
        return False, f"dt={dt!r} violates the stability bound; admissible dt <= {bound!r}"
    return True, ""
