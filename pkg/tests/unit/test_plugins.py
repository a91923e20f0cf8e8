import argparse
import json
import tempfile
from pathlib import Path

import pytest

from sparcmod.core.plugin_interface import PluginManager
from sparcmod.errors import InvalidParameterError
from sparcmod.plugins.analysis_plugin import AnalysisPlugin, BoundsCommand
from sparcmod.plugins.simulation_plugin import SimulationPlugin

EXTRA_PLUGIN = """
from sparcmod.core.commands import Command
from sparcmod.core.plugin_interface import Plugin


class EchoCommand(Command):
    def get_name(self):
        return "echo"

    def get_help(self):
        return "echo command"

    def execute(self, args):
        return "echo"


class EchoPlugin(Plugin):
    def get_name(self):
        return "Echo"

    def get_version(self):
        return "0.1.0"

    def get_description(self):
        return "Echo plugin"

    def get_commands(self):
        return [EchoCommand()]
"""


def _parse(command, argv):
    parser = argparse.ArgumentParser()
    command.add_arguments(parser)
    return parser.parse_args(argv)


class TestBuiltinPlugins:
    """Test the plugins shipped with the package."""

    def test_simulation_plugin_info(self):
        plugin = SimulationPlugin()
        assert plugin.get_name() == "Simulation"
        assert plugin.get_version() == "1.0.0"
        assert [c.get_name() for c in plugin.get_commands()] == ["simulate", "sweep", "compare"]

    def test_analysis_plugin_info(self):
        plugin = AnalysisPlugin()
        assert "state evolution" in plugin.get_description().lower()
        assert [c.get_name() for c in plugin.get_commands()] == ["se", "bounds"]


class TestBoundsCommand:
    """Test the bounds calculator command."""

    def test_explicit_nu(self):
        cmd = BoundsCommand()
        args = _parse(cmd, ["--K", "4", "--M", "256", "--delta", "0.2", "--delta-tilde", "0.3",
                            "--nu", "2.5", "1.0"])
        out = json.loads(cmd.execute(args))
        assert out["bounds"]["classification"] == ["above", "below"]
        assert "kappa" in out["bounds"]["banner"]
        assert "nu0" not in out

    def test_from_config(self, write_config):
        cmd = BoundsCommand()
        args = _parse(cmd, ["--K", "2", "--M", "4", "--delta", "0.2", "--delta-tilde", "0.3",
                            "--base", str(write_config())])
        out = json.loads(cmd.execute(args))
        assert len(out["nu0"]) == 1
        assert out["bounds"]["nu"] == out["nu0"]
        assert out["bounds"]["nu_lower"] <= out["nu0"][0] <= out["bounds"]["nu_upper"]
        assert "thresholds" not in out

    def test_needs_nu_or_base(self):
        cmd = BoundsCommand()
        args = _parse(cmd, ["--K", "2", "--M", "4", "--delta", "0.2", "--delta-tilde", "0.3"])
        with pytest.raises(InvalidParameterError, match="--nu"):
            cmd.execute(args)


class TestPluginManager:
    """Test plugin manager functionality."""

    def test_plugin_discovery(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            (Path(temp_dir) / "echo_plugin.py").write_text(EXTRA_PLUGIN)
            manager = PluginManager([temp_dir], include_default=False)
            assert [name for name, _ in manager.discover_plugins()] == ["echo_plugin"]

    def test_load_and_unload(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            (Path(temp_dir) / "echo_plugin.py").write_text(EXTRA_PLUGIN)
            manager = PluginManager([temp_dir], include_default=False)
            assert manager.load_all_plugins() == {"echo_plugin": True}
            assert "echo" in manager.get_plugin_commands()
            assert manager.get_plugin_info()["echo_plugin"]["version"] == "0.1.0"
            assert manager.unload_plugin("echo_plugin")
            assert "echo" not in manager.get_plugin_commands()
            assert not manager.unload_plugin("echo_plugin")

    def test_broken_plugin_is_reported(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            (Path(temp_dir) / "broken_plugin.py").write_text("raise RuntimeError('boom')\n")
            (Path(temp_dir) / "empty_plugin.py").write_text("X = 1\n")
            manager = PluginManager([temp_dir], include_default=False)
            assert manager.load_all_plugins() == {"broken_plugin": False, "empty_plugin": False}

    def test_missing_directory(self):
        assert PluginManager(["/nonexistent/plugins"], include_default=False).discover_plugins() == []

    def test_load_builtin_plugins(self):
        manager = PluginManager()
        results = manager.load_all_plugins()
        assert results == {"analysis_plugin": True, "simulation_plugin": True}
        commands = manager.get_plugin_commands()
        assert set(commands) == {"simulate", "sweep", "compare", "se", "bounds"}
