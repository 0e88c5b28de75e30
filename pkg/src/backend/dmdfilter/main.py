"""Command-Line Entry Point

This module contains the ``dmdfilter`` click group with all command
registrations, the logging setup and ``cli_main``, which maps errors to the
documented process exit codes.
"""

import logging
import sys
from typing import List, Optional

import click

from .commands import covariances, error, estimate, filter_command, fluctuations, simulate, simulate_pair_command, study
from .config import settings
from .exceptions import DmdError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2


def setup_logging(level: str, log_file: Optional[str] = None) -> None:
    """Configure root logging to stderr (and optionally a file)."""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=handlers,
        force=True,
    )


@click.group(name="dmdfilter")
@click.version_option(version=settings.VERSION, prog_name=settings.APP_NAME)
@click.option("--log-level", default=settings.LOG_LEVEL, show_default=True, help="Logging level.")
def cli(log_level: str) -> None:
    """Simulate discrete Markov diffusions, filter them and run Monte Carlo studies."""
    setup_logging(log_level, settings.LOG_FILE)


cli.add_command(simulate)
cli.add_command(simulate_pair_command)
cli.add_command(fluctuations)
cli.add_command(filter_command)
cli.add_command(estimate)
cli.add_command(covariances)
cli.add_command(error)
cli.add_command(study)


def cli_main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and return its exit code instead of exiting.

    0 on success, 1 on usage errors, 2 on numerical or domain errors and 3
    when a study finishes with a failed acceptance check.
    """
    try:
        result = cli.main(args=argv, prog_name="dmdfilter", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except DmdError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        click.echo(f"Error: {exc}", err=True)
        return exc.exit_code
    except ValueError as exc:
        logger.error(f"Invalid input: {exc}")
        click.echo(f"Error: {exc}", err=True)
        return EXIT_DOMAIN
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(cli_main())
