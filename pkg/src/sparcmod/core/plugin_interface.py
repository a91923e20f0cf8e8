"""
Plugins contribute CLI subcommands. The built-in ones live in
:mod:`sparcmod.plugins`; extra directories can be scanned as well.
"""

import importlib.util
import logging
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass
from pathlib import Path
from types import ModuleType
from typing import Any, Dict, Iterable, List, Optional, Tuple, Type

from sparcmod.core.commands import Command

logger = logging.getLogger(__name__)

BUILTIN_PLUGIN_DIR = Path(__file__).resolve().parent.parent / "plugins"


class Plugin(ABC):
    """A named, versioned bundle of subcommands."""

    @abstractmethod
    def get_name(self) -> str:
        """Return the plugin name."""

    @abstractmethod
    def get_version(self) -> str:
        """Return the plugin version."""

    @abstractmethod
    def get_description(self) -> str:
        """Return the plugin description."""

    @abstractmethod
    def get_commands(self) -> List[Command]:
        """Return the subcommands this plugin adds."""

    def initialize(self) -> bool:
        return True

    def cleanup(self) -> bool:
        return True


@dataclass(frozen=True)
class PluginRecord:
    name: str
    version: str
    description: str
    path: str
    commands: Tuple[str, ...]


def _module_source(path: Path) -> Path:
    return path / "__init__.py" if path.is_dir() else path


def _import_file(name: str, path: Path) -> ModuleType:
    source = _module_source(path)
    locations = [str(path)] if path.is_dir() else None
    spec = importlib.util.spec_from_file_location(name, source, submodule_search_locations=locations)
    if spec is None or spec.loader is None:
        raise ImportError(f"cannot import {source}")
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def _plugin_class(module: ModuleType) -> Optional[Type[Plugin]]:
    for value in vars(module).values():
        if isinstance(value, type) and issubclass(value, Plugin) and value is not Plugin:
            return value
    return None


class PluginManager:
    """Finds plugin modules, instantiates their Plugin class and collects commands."""

    def __init__(self, plugin_dirs: Optional[Iterable[str]] = None, include_default: bool = True):
        self.plugin_dirs = [Path(d) for d in plugin_dirs or []]
        if include_default:
            self.plugin_dirs.append(BUILTIN_PLUGIN_DIR)
        self._plugins: Dict[str, Plugin] = {}
        self._records: Dict[str, PluginRecord] = {}
        self._commands: Dict[str, Command] = {}

    def discover_plugins(self) -> List[Tuple[str, str]]:
        """(name, path) of every module or package, sorted by name within each directory."""
        found = []
        for directory in self.plugin_dirs:
            if not directory.is_dir():
                logger.debug("plugin directory %s does not exist", directory)
                continue
            for item in sorted(directory.iterdir()):
                if item.suffix == ".py" and item.name != "__init__.py":
                    found.append((item.stem, str(item)))
                elif item.is_dir() and (item / "__init__.py").exists():
                    found.append((item.name, str(item)))
        return found

    def load_plugin(self, plugin_name: str, plugin_path: str) -> bool:
        """Import, initialise and register one plugin; False on any failure."""
        try:
            cls = _plugin_class(_import_file(plugin_name, Path(plugin_path)))
            if cls is None:
                raise ImportError(f"no Plugin subclass in {plugin_name}")
            plugin = cls()
            if not plugin.initialize():
                raise RuntimeError(f"plugin {plugin_name} failed to initialise")
            commands = plugin.get_commands()
        except Exception as exc:  # pylint: disable=broad-except
            logger.error("Failed to load plugin %s: %s", plugin_name, exc)
            return False

        for command in commands:
            name = command.get_name()
            if name in self._commands:
                logger.warning("plugin %s replaces command '%s'", plugin_name, name)
            self._commands[name] = command
        self._plugins[plugin_name] = plugin
        self._records[plugin_name] = PluginRecord(plugin.get_name(), plugin.get_version(),
                                                  plugin.get_description(), plugin_path,
                                                  tuple(c.get_name() for c in commands))
        logger.info("Loaded plugin %s v%s", plugin.get_name(), plugin.get_version())
        return True

    def load_all_plugins(self) -> Dict[str, bool]:
        return {name: self.load_plugin(name, path) for name, path in self.discover_plugins()}

    def get_plugin_commands(self) -> Dict[str, Command]:
        return dict(self._commands)

    def get_plugin_info(self) -> Dict[str, Dict[str, Any]]:
        return {name: asdict(record) for name, record in self._records.items()}

    def unload_plugin(self, plugin_name: str) -> bool:
        plugin = self._plugins.get(plugin_name)
        if plugin is None:
            return False
        try:
            plugin.cleanup()
        except Exception as exc:  # pylint: disable=broad-except
            logger.error("Error unloading plugin %s: %s", plugin_name, exc)
            return False
        for name in self._records.pop(plugin_name).commands:
            self._commands.pop(name, None)
        del self._plugins[plugin_name]
        return True
