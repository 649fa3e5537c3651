"""Version information for she-spectrum."""

__version__ = "0.1.0"
