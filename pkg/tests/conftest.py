"""Pytest configuration and fixtures for she-spectrum tests."""

import tempfile
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg
from click.testing import CliRunner

from she_spectrum.tools.linalg import SymTridiagonal


@pytest.fixture
def cli_runner():
    """Provide a Click CLI test runner."""
    return CliRunner()


@pytest.fixture
def temp_dir():
    """Provide a temporary directory for test operations."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


def laplacian_eigenvalue(n: int, k: int, beta: float = 1.0) -> float:
    """k-th smallest eigenvalue of the noise-free -A_n."""
    return 4.0 * beta * (n + 1) ** 2 * np.sin(k * np.pi / (2.0 * (n + 1))) ** 2


@pytest.fixture
def closed_form():
    """Provide the closed-form spectrum of the noise-free -A_n."""
    return laplacian_eigenvalue


@pytest.fixture
def inverse_iteration():
    """Provide a unit eigenvector of a tridiagonal matrix for a known eigenvalue."""

    def solve(T: SymTridiagonal, eigenvalue: float, iterations: int = 5) -> np.ndarray:
        shift = eigenvalue + 1e-8 * max(1.0, abs(eigenvalue))
        bands = np.zeros((3, T.n))
        bands[0, 1:] = T.offdiag
        bands[1] = T.diag - shift
        bands[2, :-1] = T.offdiag
        vector = np.random.default_rng(0).standard_normal(T.n)
        for _ in range(iterations):
            vector = scipy.linalg.solve_banded((1, 1), bands, vector)
            vector /= np.linalg.norm(vector)
        return vector

    return solve


@pytest.fixture
def path_file(temp_dir):
    """Write a forced Brownian path (one value per line) and return its location."""

    def write(values, name: str = "path.txt") -> Path:
        target = temp_dir / name
        target.write_text("".join(f"{float(v)!r}\n" for v in values))
        return target

    return write
