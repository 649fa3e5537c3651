"""Numerical library behind the she-spectrum commands."""
