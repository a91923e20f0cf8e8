import argparse
import json
from dataclasses import replace
from typing import List

import numpy as np

from sparcmod.core.commands import Command
from sparcmod.core.plugin_interface import Plugin
from sparcmod.errors import InvalidParameterError
from sparcmod.harness.config import load_config
from sparcmod.harness.output import write_se_csv
from sparcmod.harness.runner import se_for_point
from sparcmod.sparc.base_matrix import BaseKind
from sparcmod.sparc.bounds import (coupling_thresholds, initial_nu, nu_bounds, nu_regime_bounds,
                                   se_ser_bound)
from sparcmod.sparc.state_evolution import run_asymptotic_se


class SECommand(Command):
    def get_name(self) -> str:
        return "se"

    def get_help(self) -> str:
        return "run state evolution for a configured code and write the trajectory"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--config", required=True, help="run configuration (TOML)")
        parser.add_argument("--ebn0", type=float, default=None,
                            help="Eb/N0 in dB (default: first sweep point)")
        parser.add_argument("--out", default=None, help="override [output] dir")
        parser.add_argument("--asymptotic", action="store_true",
                            help="also run the large-M recursion")

    def execute(self, args: argparse.Namespace) -> str:
        config = load_config(args.config).with_overrides(out_dir=args.out)
        ebn0 = config.sweep_points()[0] if args.ebn0 is None else args.ebn0
        trajectory = se_for_point(config, ebn0)
        path = write_se_csv(trajectory, config.output.path("se_csv"))
        final = trajectory[len(trajectory) - 1]
        setup = config.point(ebn0)
        lines = [
            f"SE at {ebn0:.4g} dB: {len(trajectory) - 1} iteration(s), "
            f"final mean psi {final.psi.mean():.4g}",
            f"predicted SER bound {se_ser_bound(final.psi, setup.params.K):.4g}",
        ]
        if args.asymptotic:
            asym = run_asymptotic_se(setup.base, setup.params.sigma2, setup.params.R_nats,
                                     config.se.T_max)
            reached = not asym[-1].any()
            lines.append(f"asymptotic SE: {'decodes' if reached else 'stalls'} after "
                         f"{len(asym) - 1} step(s), {int(asym[-1].sum())} block(s) undecoded")
        lines.append(f"trajectory written to {path}")
        return "\n".join(lines)


class BoundsCommand(Command):
    def get_name(self) -> str:
        return "bounds"

    def get_help(self) -> str:
        return "evaluate the closed-form state evolution bounds (JSON)"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--K", type=int, required=True)
        parser.add_argument("--M", type=int, required=True)
        parser.add_argument("--delta", type=float, required=True)
        parser.add_argument("--delta-tilde", type=float, required=True)
        parser.add_argument("--nu", type=float, nargs="+", default=None,
                            help="nu values to classify (default: nu at t=0 of --base)")
        parser.add_argument("--base", default=None,
                            help="run configuration whose code and base matrix supply nu")
        parser.add_argument("--ebn0", type=float, default=None)
        parser.add_argument("--kappas", type=float, nargs=4, default=[1.0, 1.0, 1.0, 1.0])
        parser.add_argument("--alpha", type=float, default=1.0)

    def execute(self, args: argparse.Namespace) -> str:
        if args.nu is None and args.base is None:
            raise InvalidParameterError("bounds needs --nu values or a --base configuration")
        out = {}
        nu = args.nu
        extra = {}
        if args.base is not None:
            config = load_config(args.base)
            ebn0 = config.sweep_points()[0] if args.ebn0 is None else args.ebn0
            setup = config.point(ebn0)
            nu0 = initial_nu(setup.base, setup.params)
            out["nu0"] = nu0.tolist()
            if nu is None:
                nu = nu0
            rng = nu_bounds(setup.base, setup.params)
            extra = {"nu_lower": rng.lower, "nu_upper": rng.upper,
                     "nu_bounds_note": rng.reason or None}
            if setup.base.kind is BaseKind.SPATIALLY_COUPLED:
                out["thresholds"] = coupling_thresholds(setup.base.omega, setup.base.Lambda,
                                                  setup.params.snr, setup.params.R_nats).to_dict()
        report = nu_regime_bounds(np.asarray(nu, dtype=float), args.K, args.M, args.delta,
                                  args.delta_tilde, kappas=args.kappas, alpha=args.alpha)
        out["bounds"] = replace(report, **extra).to_dict()
        return json.dumps(out, indent=2)


class AnalysisPlugin(Plugin):
    """State evolution and bound calculators."""

    def get_name(self) -> str:
        return "Analysis"

    def get_version(self) -> str:
        return "1.0.0"

    def get_description(self) -> str:
        return "State evolution trajectories and closed-form bounds"

    def get_commands(self) -> List[Command]:
        return [SECommand(), BoundsCommand()]
