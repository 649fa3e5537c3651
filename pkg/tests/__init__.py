"""Tests for she-spectrum."""
