"""she-spectrum - Eigenvalues of random tridiagonal approximations of a stochastic heat operator."""

from she_spectrum.version import __version__

__all__ = ["__version__"]
