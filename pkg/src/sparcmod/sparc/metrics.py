"""Error rates and NMSE of decoded frames."""

import logging
from dataclasses import dataclass, asdict
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from sparcmod.errors import DimensionMismatchError
from sparcmod.sparc.bounds import ser_bound_constant
from sparcmod.sparc.encoder import BitPayload, MessageVector, message_to_bits
from sparcmod.sparc.params import SparcParams

logger = logging.getLogger(__name__)

SER_BOUND_SLACK = 1e-12


class ValueErrorConvention(str, Enum):
    INDEPENDENT = "independent"
    LOCATION_CORRECT = "location_correct"


class SectionErrors(NamedTuple):
    ser: float
    location_rate: float
    value_rate: float


class NMSE(NamedTuple):
    per_block: np.ndarray
    total: float


def section_errors(decoded: MessageVector, truth: MessageVector,
                   convention: ValueErrorConvention = ValueErrorConvention.INDEPENDENT) -> SectionErrors:
    """Section, location and value error rates.

    A section is in error when its location or its symbol is wrong. Under
    ``independent`` a wrong symbol is a value error wherever the nonzero sits;
    under ``location_correct`` it only counts when the location is right.
    """
    if (decoded.L, decoded.M, decoded.K) != (truth.L, truth.M, truth.K):
        raise DimensionMismatchError("decoded and true messages belong to different codes")
    convention = ValueErrorConvention(convention)
    loc_wrong = decoded.locations != truth.locations
    sym_wrong = decoded.symbols != truth.symbols
    if convention is ValueErrorConvention.LOCATION_CORRECT:
        val_wrong = sym_wrong & ~loc_wrong
    else:
        val_wrong = sym_wrong
    return SectionErrors(float(np.mean(loc_wrong | sym_wrong)),
                         float(np.mean(loc_wrong)),
                         float(np.mean(val_wrong)))


def bit_errors(decoded_bits, true_bits) -> float:
    a = decoded_bits.bits if isinstance(decoded_bits, BitPayload) else np.asarray(decoded_bits, dtype=bool)
    b = true_bits.bits if isinstance(true_bits, BitPayload) else np.asarray(true_bits, dtype=bool)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"bit arrays differ in length: {a.size} vs {b.size}")
    if a.size == 0:
        return 0.0
    return float(np.count_nonzero(a != b)) / a.size


def nmse(beta_est: np.ndarray, truth: np.ndarray, params: SparcParams) -> NMSE:
    beta_est = np.asarray(beta_est).ravel()
    truth = truth.values if isinstance(truth, MessageVector) else np.asarray(truth).ravel()
    if beta_est.size != params.LM or truth.size != params.LM:
        raise DimensionMismatchError(f"vectors must have length LM={params.LM}")
    sq = np.abs(beta_est - truth) ** 2
    per_block = sq.reshape(params.col_blocks, -1).sum(axis=1) / params.sections_per_block
    return NMSE(per_block, float(sq.sum() / params.L))


@dataclass(frozen=True)
class FrameResult:
    ser: float
    ber: float
    frame_error: bool
    location_error_rate: float
    value_error_rate: float
    nmse_per_block: tuple
    nmse_total: float
    iterations: int = 0
    ser_bound_ok: bool = True

    def to_dict(self) -> dict:
        out = asdict(self)
        out["nmse_per_block"] = list(self.nmse_per_block)
        return out


def evaluate_frame(decoded: MessageVector, truth: MessageVector, soft: Optional[np.ndarray],
                   params: SparcParams, iterations: int = 0,
                   convention: ValueErrorConvention = ValueErrorConvention.INDEPENDENT) -> FrameResult:
    """Score one frame; ``soft`` is the final soft estimate used for NMSE."""
    errs = section_errors(decoded, truth, convention)
    ber = bit_errors(message_to_bits(decoded, params), message_to_bits(truth, params))
    if soft is None:
        soft = decoded.values
    err = nmse(soft, truth, params)
    ser_bound_ok = errs.ser <= ser_bound_constant(params.K) * err.total + SER_BOUND_SLACK
    if not ser_bound_ok:
        logger.warning("SER %.6g exceeds %.6g x NMSE %.6g", errs.ser, ser_bound_constant(params.K), err.total)
    return FrameResult(ser=errs.ser, ber=ber, frame_error=errs.ser > 0,
                       location_error_rate=errs.location_rate, value_error_rate=errs.value_rate,
                       nmse_per_block=tuple(float(v) for v in err.per_block), nmse_total=err.total,
                       iterations=iterations, ser_bound_ok=ser_bound_ok)
