"""Experiment driver: run configuration, Monte Carlo runner, oracle decoder and writers."""

from sparcmod.harness.config import RunConfig, load_config
from sparcmod.harness.oracle import ml_oracle_decode
from sparcmod.harness.runner import PointResult, run_point, run_se_compare, run_sweep

__all__ = [
    "RunConfig",
    "load_config",
    "ml_oracle_decode",
    "PointResult",
    "run_point",
    "run_se_compare",
    "run_sweep",
]
