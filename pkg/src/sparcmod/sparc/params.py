"""
Code parameters, rate/power/SNR arithmetic and block-index maps.

Rates are carried in nats per complex channel use. The command line and the
result files report bits per real dimension, which is half the number of bits
per channel use.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from sparcmod.errors import InvalidParameterError
from sparcmod.utils.numeric import is_power_of_two, log2_int

logger = logging.getLogger(__name__)

__all__ = [
    "SparcParams",
    "ChannelSpec",
    "CodeLength",
    "BlockMaps",
    "derive_code_length",
    "bits_per_section",
    "ebn0_to_sigma2",
    "sigma2_to_ebn0",
    "block_maps",
    "rate_bits_per_dim",
    "shannon_limit_ebn0_db",
    "decoding_complexity_ratio",
]


def _require_positive_int(name: str, value) -> int:
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise InvalidParameterError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def _require_power_of_two(name: str, value) -> int:
    if not is_power_of_two(value):
        raise InvalidParameterError(f"{name} must be a power of two, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class SparcParams:
    """Dimensions of a modulated complex SPARC and of its block structure.

    ``row_blocks`` and ``col_blocks`` are the shape of the base matrix. Every
    column block holds ``L // col_blocks`` whole sections.
    """

    L: int
    M: int
    K: int
    n: int
    P: float
    sigma2: float
    row_blocks: int = 1
    col_blocks: int = 1

    def __post_init__(self):
        _require_positive_int("L", self.L)
        _require_power_of_two("M", self.M)
        _require_power_of_two("K", self.K)
        _require_positive_int("n", self.n)
        _require_positive_int("row_blocks", self.row_blocks)
        _require_positive_int("col_blocks", self.col_blocks)
        if not self.P > 0:
            raise InvalidParameterError(f"P must be positive, got {self.P!r}")
        if not self.sigma2 > 0:
            raise InvalidParameterError(f"sigma2 must be positive, got {self.sigma2!r}")
        if self.L % self.col_blocks:
            raise InvalidParameterError(
                f"col_blocks={self.col_blocks} must divide L={self.L}")
        if self.n % self.row_blocks:
            raise InvalidParameterError(
                f"row_blocks={self.row_blocks} must divide n={self.n}")

    @property
    def R_nats(self) -> float:
        return self.L * math.log(self.K * self.M) / self.n

    @property
    def rate_bits_per_dim(self) -> float:
        return rate_bits_per_dim(self.R_nats)

    @property
    def log_KM(self) -> float:
        return math.log(self.K * self.M)

    @property
    def section_bits(self) -> int:
        return bits_per_section(self.M, self.K)

    @property
    def total_bits(self) -> int:
        return self.L * self.section_bits

    @property
    def LM(self) -> int:
        return self.L * self.M

    @property
    def rows_per_block(self) -> int:
        return self.n // self.row_blocks

    @property
    def cols_per_block(self) -> int:
        return self.LM // self.col_blocks

    @property
    def sections_per_block(self) -> int:
        return self.L // self.col_blocks

    @property
    def snr(self) -> float:
        return self.P / self.sigma2

    def with_sigma2(self, sigma2: float) -> "SparcParams":
        return replace(self, sigma2=sigma2)

    def with_blocks(self, row_blocks: int, col_blocks: int) -> "SparcParams":
        return replace(self, row_blocks=row_blocks, col_blocks=col_blocks)

    def channel(self) -> "ChannelSpec":
        return ChannelSpec.from_sigma2(self.P, self.sigma2, self.R_nats)


@dataclass(frozen=True)
class ChannelSpec:
    snr: float
    capacity_nats: float
    ebn0_db: float

    @classmethod
    def from_sigma2(cls, P: float, sigma2: float, R_nats: float) -> "ChannelSpec":
        snr = P / sigma2
        return cls(snr=snr, capacity_nats=math.log1p(snr),
                   ebn0_db=sigma2_to_ebn0(sigma2, P, R_nats))

    @classmethod
    def from_ebn0(cls, ebn0_db: float, P: float, R_nats: float) -> "ChannelSpec":
        sigma2 = ebn0_to_sigma2(ebn0_db, P, R_nats)
        return cls(snr=P / sigma2, capacity_nats=math.log1p(P / sigma2), ebn0_db=ebn0_db)

    @property
    def capacity_bits(self) -> float:
        return self.capacity_nats / math.log(2)


class CodeLength(NamedTuple):
    n: int
    rate_nats: float


class BlockMaps(NamedTuple):
    """0-based row-block index per row and column-block index per column."""

    row: np.ndarray
    col: np.ndarray


def derive_code_length(L: int, M: int, K: int, target_rate_nats: float,
                       row_blocks: int = 1) -> CodeLength:
    """Code length closest to ``target_rate_nats``, and the rate it achieves.

    With ``row_blocks > 1`` the length is rounded to the nearest multiple of
    the row-block count so the base matrix rows split it evenly.
    """
    if not target_rate_nats > 0:
        raise InvalidParameterError(f"target rate must be positive, got {target_rate_nats!r}")
    _require_positive_int("L", L)
    _require_positive_int("row_blocks", row_blocks)
    bits_per_section(M, K)

    exact = L * math.log(K * M) / target_rate_nats
    n = row_blocks * max(1, int(round(exact / row_blocks)))
    rate = L * math.log(K * M) / n
    logger.debug("derived n=%d (exact %.3f) rate=%.6f nats", n, exact, rate)
    return CodeLength(n, rate)


def bits_per_section(M: int, K: int) -> int:
    return log2_int(_require_power_of_two("M", M)) + log2_int(_require_power_of_two("K", K))


def ebn0_to_sigma2(ebn0_db: float, P: float, R_nats: float) -> float:
    """Noise variance for a given Eb/N0, with N0 the total complex noise variance."""
    if not P > 0 or not R_nats > 0:
        raise InvalidParameterError(f"P and R_nats must be positive, got P={P!r}, R={R_nats!r}")
    bits = R_nats / math.log(2)
    return P / (bits * 10.0 ** (ebn0_db / 10.0))


def sigma2_to_ebn0(sigma2: float, P: float, R_nats: float) -> float:
    if not sigma2 > 0 or not P > 0 or not R_nats > 0:
        raise InvalidParameterError("sigma2, P and R_nats must all be positive")
    bits = R_nats / math.log(2)
    return 10.0 * math.log10(P / (bits * sigma2))


def block_maps(params: SparcParams) -> BlockMaps:
    row = np.arange(params.n) // params.rows_per_block
    col = np.arange(params.LM) // params.cols_per_block
    return BlockMaps(row, col)


def rate_bits_per_dim(R_nats: float) -> float:
    return R_nats / math.log(2) / 2.0


def shannon_limit_ebn0_db(R_nats: float) -> float:
    """Smallest Eb/N0 (dB) at which rate ``R_nats`` is below capacity."""
    if not R_nats > 0:
        raise InvalidParameterError(f"rate must be positive, got {R_nats!r}")
    snr = math.expm1(R_nats)
    return 10.0 * math.log10(snr / (R_nats / math.log(2)))


def decoding_complexity_ratio(K: int, L: int, M_unmod: int) -> float:
    """Per-iteration cost of the unmodulated code over the K-modulated one at fixed KM."""
    _require_power_of_two("K", K)
    _require_power_of_two("M_unmod", M_unmod)
    if M_unmod < K:
        raise InvalidParameterError(f"M_unmod={M_unmod} must be at least K={K}")
    log_lm = math.log2(L * M_unmod)
    return K * (log_lm + 1) / (log_lm + K - math.log2(K))
