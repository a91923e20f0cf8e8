"""
Base matrices: the block variance profiles of the design matrix.

Entries are in power units. The ``1/L`` scaling is applied when the design
operator is sampled, so every base matrix here has mean entry ``P``.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from sparcmod.errors import InvalidParameterError

logger = logging.getLogger(__name__)

POWER_RTOL = 1e-12


class BaseKind(str, Enum):
    FLAT = "flat"
    SPATIALLY_COUPLED = "sc"
    POWER_ALLOCATED = "pa_exp"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class BaseMatrix:
    entries: np.ndarray
    kind: BaseKind
    omega: Optional[int] = None
    Lambda: Optional[int] = None
    rho: Optional[float] = None

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2 or entries.size == 0:
            raise InvalidParameterError(f"base matrix must be a nonempty 2-D array, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)) or np.any(entries < 0):
            raise InvalidParameterError("base matrix entries must be finite and nonnegative")
        if not entries.mean() > 0:
            raise InvalidParameterError("base matrix must have positive average power")
        empty = np.flatnonzero(entries.sum(axis=0) == 0)
        if empty.size:
            raise InvalidParameterError(f"column block {empty[0]} has no power in any row block")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def shape(self):
        return self.entries.shape

    @property
    def row_blocks(self) -> int:
        return self.entries.shape[0]

    @property
    def col_blocks(self) -> int:
        return self.entries.shape[1]

    @property
    def P(self) -> float:
        return float(self.entries.mean())

    @property
    def nonzero_blocks(self) -> np.ndarray:
        """(row, col) index pairs of the nonzero entries, row-major order."""
        return np.argwhere(self.entries > 0)

    def to_rows(self) -> List[List[float]]:
        return self.entries.tolist()

    def describe(self) -> dict:
        return {
            "kind": self.kind.value,
            "shape": list(self.shape),
            "omega": self.omega,
            "Lambda": self.Lambda,
            "rho": self.rho,
            "P": self.P,
        }

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]], P: Optional[float] = None) -> "BaseMatrix":
        """Custom base matrix from a row-major array of arrays.

        When ``P`` is given the mean entry must equal it.
        """
        base = cls(np.asarray(rows, dtype=float), BaseKind.CUSTOM)
        if P is not None:
            _check_power(base.entries, P)
        return base


class RowColAverages(NamedTuple):
    row_avgs: np.ndarray
    col_avgs: np.ndarray
    xi1: float
    xi2: float


class RateLoss(NamedTuple):
    R_inner: float
    loss: float


def _check_power(entries: np.ndarray, P: float) -> None:
    if not math.isclose(float(entries.mean()), P, rel_tol=POWER_RTOL, abs_tol=0.0):
        raise InvalidParameterError(
            f"base matrix mean {entries.mean():.15g} violates power constraint P={P:.15g}")


def _check_sc_args(omega: int, Lambda: int, rho: float) -> None:
    if int(omega) != omega or omega < 1:
        raise InvalidParameterError(f"omega must be an integer >= 1, got {omega!r}")
    if int(Lambda) != Lambda or Lambda < 2 * omega - 1:
        raise InvalidParameterError(f"Lambda must be an integer >= 2*omega-1={2 * omega - 1}, got {Lambda!r}")
    if not 0 <= rho < 1:
        raise InvalidParameterError(f"rho must lie in [0, 1), got {rho!r}")
    if Lambda == 1 and rho > 0:
        raise InvalidParameterError("rho > 0 needs off-band entries, which Lambda=1 does not have")


def build_sc(omega: int, Lambda: int, rho: float, P: float) -> BaseMatrix:
    """(omega, Lambda, rho) spatially coupled base matrix with mean entry P."""
    _check_sc_args(omega, Lambda, rho)
    if not P > 0:
        raise InvalidParameterError(f"P must be positive, got {P!r}")
    omega, Lambda = int(omega), int(Lambda)
    n_rows = Lambda + omega - 1

    r = np.arange(n_rows)[:, None]
    c = np.arange(Lambda)[None, :]
    band = (c <= r) & (r <= c + omega - 1)
    band_value = (1 - rho) * P * n_rows / omega
    off_value = rho * P * n_rows / (Lambda - 1) if rho > 0 else 0.0
    entries = np.where(band, band_value, off_value)

    _check_power(entries, P)
    logger.debug("built (%d,%d,%g) base matrix of shape %s", omega, Lambda, rho, entries.shape)
    return BaseMatrix(entries, BaseKind.SPATIALLY_COUPLED, omega=omega, Lambda=Lambda, rho=float(rho))


def build_pa_exp(L: int, P: float, capacity_nats: float) -> BaseMatrix:
    """1 x L exponentially decaying power allocation with mean entry P."""
    if int(L) != L or L < 1:
        raise InvalidParameterError(f"L must be a positive integer, got {L!r}")
    if not P > 0 or not capacity_nats > 0:
        raise InvalidParameterError("P and capacity must be positive")
    C = capacity_nats
    ell = np.arange(1, int(L) + 1)
    scale = L * P * math.expm1(C / L) / -math.expm1(-C)
    entries = (scale * np.exp(-C * ell / L))[None, :]
    _check_power(entries, P)
    return BaseMatrix(entries, BaseKind.POWER_ALLOCATED)


def build_flat(P: float) -> BaseMatrix:
    if not P > 0:
        raise InvalidParameterError(f"P must be positive, got {P!r}")
    return BaseMatrix(np.array([[float(P)]]), BaseKind.FLAT)


def rate_loss(omega: int, Lambda: int, R: float) -> RateLoss:
    """Inner rate of a coupled code of overall rate R and the loss from coupling."""
    _check_sc_args(omega, Lambda, 0.0)
    R_inner = R * (Lambda + omega - 1) / Lambda
    return RateLoss(R_inner, R * (omega - 1) / Lambda)


def row_col_averages(base: BaseMatrix) -> RowColAverages:
    W = base.entries
    row_avgs = W.mean(axis=1)
    col_avgs = W.mean(axis=0)
    both = np.concatenate([row_avgs, col_avgs])
    return RowColAverages(row_avgs, col_avgs, float(both.min()), float(both.max()))
