"""Main CLI entry point for she-spectrum."""

import click

from she_spectrum.commands.converge import converge
from she_spectrum.commands.eig import eig
from she_spectrum.commands.mc import mc
from she_spectrum.commands.she import she
from she_spectrum.commands.weakform import weakform
from she_spectrum.version import __version__


@click.group()
@click.version_option(version=__version__, prog_name="she-spectrum")
@click.pass_context
def cli(ctx):
    """
    she-spectrum - Eigenvalue studies of the random operator behind the stochastic heat equation.

    Every command writes a table (CSV or JSON) whose metadata block records
    the full configuration, so any run can be reproduced byte for byte.

    Use 'she-spectrum COMMAND --help' for more information on a specific command.
    """
    ctx.ensure_object(dict)


# Register commands
cli.add_command(eig)
cli.add_command(converge)
cli.add_command(mc)
cli.add_command(weakform)
cli.add_command(she)


def main():
    """Main entry point for the CLI application."""
    cli(obj={})


if __name__ == "__main__":
    main()
