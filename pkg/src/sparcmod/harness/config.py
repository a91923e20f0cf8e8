"""
Run configuration: TOML file <-> frozen dataclasses.

A config has the sections ``[code]``, ``[base]``, ``[channel]``, ``[decoder]``,
``[operator]``, ``[run]``, ``[se]`` and ``[output]``. Every section is optional
except ``[code]``; unknown sections or keys are rejected.
"""

import dataclasses
import logging
import math
import sys
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from sparcmod.errors import ConfigError, SparcError
from sparcmod.sparc.amp import DecoderConfig
from sparcmod.sparc.base_matrix import (BaseKind, BaseMatrix, build_flat, build_pa_exp,
                                        build_sc)
from sparcmod.sparc.design import DEFAULT_MAX_ENTRIES, OperatorKind
from sparcmod.sparc.encoder import BitPayload
from sparcmod.sparc.metrics import ValueErrorConvention
from sparcmod.sparc.params import (CodeLength, SparcParams, bits_per_section, derive_code_length,
                                   ebn0_to_sigma2, sigma2_to_ebn0)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CodeConfig:
    """``n`` and ``rate_bits_per_dim`` are alternatives; exactly one must be set."""

    L: int
    M: int
    K: int = 1
    P: float = 1.0
    n: Optional[int] = None
    rate_bits_per_dim: Optional[float] = None

    def __post_init__(self):
        if (self.n is None) == (self.rate_bits_per_dim is None):
            raise ConfigError("[code] needs exactly one of 'n' and 'rate_bits_per_dim'")


@dataclass(frozen=True)
class BaseConfig:
    kind: BaseKind = BaseKind.FLAT
    omega: Optional[int] = None
    Lambda: Optional[int] = None
    rho: float = 0.0
    entries: Optional[Tuple[Tuple[float, ...], ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", BaseKind(self.kind))
        if self.kind is BaseKind.SPATIALLY_COUPLED and (self.omega is None or self.Lambda is None):
            raise ConfigError("[base] kind 'sc' needs omega and Lambda")
        if self.kind is BaseKind.CUSTOM:
            if not self.entries:
                raise ConfigError("[base] kind 'custom' needs entries")
            object.__setattr__(self, "entries", tuple(tuple(float(v) for v in row) for row in self.entries))

    @property
    def row_blocks(self) -> int:
        if self.kind is BaseKind.SPATIALLY_COUPLED:
            return self.Lambda + self.omega - 1
        if self.kind is BaseKind.CUSTOM:
            return len(self.entries)
        return 1

    def build(self, L: int, P: float, sigma2: float) -> BaseMatrix:
        if self.kind is BaseKind.SPATIALLY_COUPLED:
            return build_sc(self.omega, self.Lambda, self.rho, P)
        if self.kind is BaseKind.POWER_ALLOCATED:
            return build_pa_exp(L, P, math.log1p(P / sigma2))
        if self.kind is BaseKind.CUSTOM:
            return BaseMatrix.from_rows(self.entries, P)
        return build_flat(P)


@dataclass(frozen=True)
class ChannelConfig:
    """Sweep points in Eb/N0 (dB), or one fixed noise variance."""

    ebn0_db: Tuple[float, ...] = ()
    sigma2: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "ebn0_db", tuple(float(v) for v in self.ebn0_db))
        if self.sigma2 is not None and self.ebn0_db:
            raise ConfigError("[channel] takes either ebn0_db or sigma2, not both")
        if self.sigma2 is None and not self.ebn0_db:
            raise ConfigError("[channel] sweep is empty: set ebn0_db or sigma2")


@dataclass(frozen=True)
class OperatorConfig:
    kind: OperatorKind = OperatorKind.DFT
    fresh_per_trial: bool = True
    max_entries: int = DEFAULT_MAX_ENTRIES

    def __post_init__(self):
        object.__setattr__(self, "kind", OperatorKind(self.kind))


@dataclass(frozen=True)
class RunSettings:
    trials: int = 200
    master_seed: int = 0
    workers: int = 1
    value_error_convention: ValueErrorConvention = ValueErrorConvention.INDEPENDENT
    # Sent in every trial instead of random bits when set.
    payload_hex: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "value_error_convention",
                           ValueErrorConvention(self.value_error_convention))
        if self.trials < 1:
            raise ConfigError(f"[run] trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise ConfigError(f"[run] workers must be >= 1, got {self.workers}")
        if self.payload_hex is not None:
            text = str(self.payload_hex).strip().lower().removeprefix("0x")
            try:
                bytes.fromhex(text)
            except ValueError as exc:
                raise ConfigError(f"[run] payload_hex is not a hex string: {exc}") from exc
            object.__setattr__(self, "payload_hex", text)


@dataclass(frozen=True)
class SEConfig:
    T_max: int = 50
    mc_samples: int = 2000
    mc_seed: int = 0
    compare_trials: int = 20


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "results"
    results_csv: str = "results.csv"
    manifest_json: str = "manifest.json"
    se_csv: str = "se.csv"
    compare_csv: str = "se_compare.csv"

    def path(self, name: str) -> Path:
        return Path(self.dir) / getattr(self, name)


@dataclass(frozen=True)
class PointSetup:
    """Everything one sweep point needs to build trials."""

    ebn0_db: float
    params: SparcParams
    base: BaseMatrix


_SECTIONS = {
    "code": CodeConfig,
    "base": BaseConfig,
    "channel": ChannelConfig,
    "decoder": DecoderConfig,
    "operator": OperatorConfig,
    "run": RunSettings,
    "se": SEConfig,
    "output": OutputConfig,
}


@dataclass(frozen=True)
class RunConfig:
    code: CodeConfig
    base: BaseConfig = field(default_factory=BaseConfig)
    channel: ChannelConfig = field(default_factory=lambda: ChannelConfig(ebn0_db=(6.0,)))
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    operator: OperatorConfig = field(default_factory=OperatorConfig)
    run: RunSettings = field(default_factory=RunSettings)
    se: SEConfig = field(default_factory=SEConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def code_length(self) -> CodeLength:
        c = self.code
        if c.n is not None:
            return CodeLength(int(c.n), c.L * math.log(c.K * c.M) / c.n)
        target = 2 * math.log(2) * c.rate_bits_per_dim
        return derive_code_length(c.L, c.M, c.K, target, self.base.row_blocks)

    def sweep_points(self) -> Tuple[float, ...]:
        """Eb/N0 of every sweep point; a fixed sigma2 gives a single point."""
        if self.channel.sigma2 is not None:
            return (sigma2_to_ebn0(self.channel.sigma2, self.code.P, self.code_length().rate_nats),)
        return self.channel.ebn0_db

    def point(self, ebn0_db: float) -> PointSetup:
        c = self.code
        length = self.code_length()
        if self.channel.sigma2 is not None:
            sigma2 = self.channel.sigma2
        else:
            sigma2 = ebn0_to_sigma2(ebn0_db, c.P, length.rate_nats)
        base = self.base.build(c.L, c.P, sigma2)
        params = SparcParams(L=c.L, M=c.M, K=c.K, n=length.n, P=c.P, sigma2=sigma2,
                             row_blocks=base.row_blocks, col_blocks=base.col_blocks)
        return PointSetup(float(ebn0_db), params, base)

    def payload(self) -> Optional[BitPayload]:
        """The fixed payload zero-padded to the code's capacity, or None for random bits."""
        if self.run.payload_hex is None:
            return None
        total_bits = self.code.L * bits_per_section(self.code.M, self.code.K)
        return BitPayload.from_hex(self.run.payload_hex, total_bits)

    def with_overrides(self, seed: Optional[int] = None, workers: Optional[int] = None,
                       out_dir: Optional[str] = None,
                       payload_hex: Optional[str] = None) -> "RunConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, run=replace(cfg.run, master_seed=seed))
        if workers is not None:
            cfg = replace(cfg, run=replace(cfg.run, workers=workers))
        if payload_hex is not None:
            cfg = replace(cfg, run=replace(cfg.run, payload_hex=payload_hex))
        if out_dir is not None:
            cfg = replace(cfg, output=replace(cfg.output, dir=str(out_dir)))
        return cfg

    def to_dict(self) -> Dict[str, Dict[str, Any]]:
        out = {}
        for name in _SECTIONS:
            section = getattr(self, name)
            values = section.to_dict() if isinstance(section, DecoderConfig) else dataclasses.asdict(section)
            out[name] = {k: _plain(v) for k, v in values.items() if v is not None}
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        unknown = set(data) - set(_SECTIONS)
        if unknown:
            raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
        if "code" not in data:
            raise ConfigError("config needs a [code] section")
        sections = {name: _build_section(name, _SECTIONS[name], data[name])
                    for name in _SECTIONS if name in data}
        return cls(**sections)


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    return value


def _build_section(name: str, section_cls, values: Any):
    if not isinstance(values, dict):
        raise ConfigError(f"[{name}] must be a table")
    known = {f.name for f in dataclasses.fields(section_cls)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {sorted(unknown)}")
    try:
        return section_cls(**values)
    except ConfigError:
        raise
    except (SparcError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid [{name}] section: {exc}") from exc


def load_config(path: Union[str, Path]) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from exc
    config = RunConfig.from_dict(data)
    logger.info("loaded config %s", path)
    return config
