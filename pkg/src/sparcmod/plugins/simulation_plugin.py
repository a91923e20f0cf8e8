import argparse
from pathlib import Path
from typing import List, Optional

from sparcmod.core.commands import Command
from sparcmod.core.plugin_interface import Plugin
from sparcmod.errors import ConfigError
from sparcmod.harness.config import RunConfig, load_config
from sparcmod.harness.output import write_compare_csv, write_sweep
from sparcmod.harness.runner import run_se_compare, run_sweep

COMPARE_TOLERANCE = 0.05


class ConfigCommand(Command):
    """Base class for commands driven by a run config file."""

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--config", required=True, help="run configuration (TOML)")
        parser.add_argument("--seed", type=int, default=None, help="override [run] master_seed")
        parser.add_argument("--workers", type=int, default=None, help="override [run] workers")
        parser.add_argument("--out", default=None, help="override [output] dir")
        payload = parser.add_mutually_exclusive_group()
        payload.add_argument("--payload-hex", default=None,
                             help="send these bytes (hex) in every trial instead of random bits")
        payload.add_argument("--payload-file", default=None,
                             help="send the contents of this file in every trial")

    def load(self, args: argparse.Namespace) -> RunConfig:
        return load_config(args.config).with_overrides(seed=args.seed, workers=args.workers,
                                                       out_dir=args.out,
                                                       payload_hex=_payload_hex(args))


def _payload_hex(args: argparse.Namespace) -> Optional[str]:
    path = getattr(args, "payload_file", None)
    if path is None:
        return getattr(args, "payload_hex", None)
    try:
        return Path(path).read_bytes().hex()
    except OSError as exc:
        raise ConfigError(f"cannot read payload file {path}: {exc}") from exc


class SimulateCommand(ConfigCommand):
    def get_name(self) -> str:
        return "simulate"

    def get_help(self) -> str:
        return "run the configured Eb/N0 sweep and print the error rates"

    def execute(self, args: argparse.Namespace) -> str:
        config = self.load(args)
        sweep = run_sweep(config)
        lines = [sweep.to_frame().to_string(index=False)]
        if args.out is not None:
            written = write_sweep(config, sweep)
            lines.append(f"results written to {written['results_csv']}")
        return "\n".join(lines)


class SweepCommand(ConfigCommand):
    def get_name(self) -> str:
        return "sweep"

    def get_help(self) -> str:
        return "run the configured sweep and write the results CSV and manifest"

    def execute(self, args: argparse.Namespace) -> str:
        config = self.load(args)
        written = write_sweep(config, run_sweep(config))
        return "\n".join(f"{key}: {path}" for key, path in written.items())


class CompareCommand(ConfigCommand):
    def get_name(self) -> str:
        return "compare"

    def get_help(self) -> str:
        return "compare mean AMP NMSE per block with the state evolution prediction"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        super().add_arguments(parser)
        parser.add_argument("--ebn0", type=float, default=None,
                            help="Eb/N0 in dB (default: first sweep point)")

    def execute(self, args: argparse.Namespace) -> str:
        config = self.load(args)
        table = run_se_compare(config, args.ebn0)
        path = write_compare_csv(table, config.output.path("compare_csv"))
        within = float((table["abs_dev"] <= COMPARE_TOLERANCE).mean())
        return (f"max |AMP - SE| = {table['abs_dev'].max():.4g}; "
                f"{100 * within:.1f}% of cells within {COMPARE_TOLERANCE}\n"
                f"table written to {path}")


class SimulationPlugin(Plugin):
    """Monte Carlo simulation commands."""

    def get_name(self) -> str:
        return "Simulation"

    def get_version(self) -> str:
        return "1.0.0"

    def get_description(self) -> str:
        return "Error-rate sweeps and AMP versus state evolution comparisons"

    def get_commands(self) -> List[Command]:
        return [SimulateCommand(), SweepCommand(), CompareCommand()]
