"""
Main entry point for sparc-mod.
"""

import sys
from typing import List, Optional

from sparcmod.core.commands import EXIT_FATAL, CLIEngine, CommandRegistry
from sparcmod.core.plugin_interface import PluginManager


def build_engine(plugin_manager: Optional[PluginManager] = None) -> CLIEngine:
    """CLI engine with every discovered plugin's commands registered."""
    manager = plugin_manager or PluginManager()
    manager.load_all_plugins()
    registry = CommandRegistry()
    for command in manager.get_plugin_commands().values():
        registry.register_command(command)
    return CLIEngine(registry)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the sparc-mod command line."""
    try:
        return build_engine().run(argv)
    except SystemExit:
        raise
    except Exception as e:  # pylint: disable=broad-except
        print(f"Fatal error: {e}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
