"""This module defines the command engine behind the ``sparc-mod`` command line."""

import argparse
import logging
from abc import ABC, abstractmethod
from typing import Dict, List, Optional

from sparcmod import __version__
from sparcmod.errors import SparcError
from sparcmod.utils.log import configure_logging

logger = logging.getLogger(__name__)

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]

EXIT_OK = 0
EXIT_SPARC_ERROR = 1
EXIT_FATAL = 2


class Command(ABC):
    """Abstract base class for all subcommands."""

    @abstractmethod
    def get_name(self) -> str:
        """Return the subcommand name."""

    @abstractmethod
    def get_help(self) -> str:
        """Return a one-line description."""

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        """Declare the subcommand's options."""

    @abstractmethod
    def execute(self, args: argparse.Namespace) -> str:
        """Run the command and return the text to print."""


class CommandRegistry:
    """Registry for managing subcommands."""

    def __init__(self):
        self.commands: Dict[str, Command] = {}

    def register_command(self, command: Command) -> None:
        name = command.get_name()
        if name in self.commands:
            logger.warning("command %r registered twice; keeping the latest", name)
        self.commands[name] = command

    def get_command(self, name: str) -> Optional[Command]:
        return self.commands.get(name)

    def list_commands(self) -> List[str]:
        return sorted(self.commands)


class CLIEngine:
    """argparse front-end over the registered commands."""

    def __init__(self, registry: Optional[CommandRegistry] = None):
        self.registry = registry or CommandRegistry()

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog="sparc-mod",
            description="PSK-modulated sparse superposition codes: simulation and analysis")
        parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
        parser.add_argument("--log-level", choices=LOG_LEVELS, default="WARNING",
                            help="logging verbosity (default: WARNING)")
        parser.add_argument("--log-file", default=None, help="also write log records to this file")
        sub = parser.add_subparsers(dest="command", metavar="COMMAND")
        sub.required = True
        for name in self.registry.list_commands():
            command = self.registry.get_command(name)
            command_parser = sub.add_parser(name, help=command.get_help(),
                                            description=command.get_help())
            command.add_arguments(command_parser)
        return parser

    def run(self, argv: Optional[List[str]] = None) -> int:
        args = self.build_parser().parse_args(argv)
        configure_logging(args.log_level, args.log_file)
        command = self.registry.get_command(args.command)
        try:
            output = command.execute(args)
        except SparcError as exc:
            logger.error("%s failed: %s", args.command, exc)
            return EXIT_SPARC_ERROR
        except Exception as exc:  # pylint: disable=broad-except
            logger.exception("Fatal error: %s", exc)
            return EXIT_FATAL
        if output:
            print(output)
        return EXIT_OK
