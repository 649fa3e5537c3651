"""CLI commands for she-spectrum."""
