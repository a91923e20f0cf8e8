"""Exhaustive maximum-likelihood decoding for toy codes."""

import logging

import numpy as np

from sparcmod.errors import DimensionMismatchError, SizeGuardError
from sparcmod.sparc.design import DesignOperator
from sparcmod.sparc.encoder import MessageVector, psk_constellation
from sparcmod.sparc.params import SparcParams

logger = logging.getLogger(__name__)

DEFAULT_MAX_HYPOTHESES = 2 ** 16


def ml_oracle_decode(y: np.ndarray, A: DesignOperator, params: SparcParams,
                     max_hypotheses: int = DEFAULT_MAX_HYPOTHESES) -> MessageVector:
    """Message minimising ||y - A beta||^2 over all (MK)^L valid messages.

    Per-section hypotheses are ordered as in the AMP hard decision (location
    major, symbol minor); ties go to the first message in that order.
    """
    y = np.asarray(y, dtype=complex).ravel()
    if y.size != params.n:
        raise DimensionMismatchError(f"y has length {y.size}, expected {params.n}")
    per_section = params.M * params.K
    total = per_section ** params.L
    if total > max_hypotheses:
        raise SizeGuardError(f"(MK)^L = {total} hypotheses exceed the cap of {max_hypotheses}")

    dense = A.to_dense()
    p = psk_constellation(params.K)
    codewords = np.zeros((1, params.n), dtype=complex)
    for ell in range(params.L):
        cols = dense[:, ell * params.M:(ell + 1) * params.M].T
        section = (cols[:, None, :] * p[None, :, None]).reshape(per_section, params.n)
        codewords = (codewords[:, None, :] + section[None, :, :]).reshape(-1, params.n)

    best = int(np.argmin((np.abs(y[None, :] - codewords) ** 2).sum(axis=1)))
    choice = np.array(np.unravel_index(best, (per_section,) * params.L))
    logger.debug("oracle searched %d hypotheses", total)
    return MessageVector(choice // params.K, choice % params.K + 1, params.M, params.K)
