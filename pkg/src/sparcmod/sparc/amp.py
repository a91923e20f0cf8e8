"""
AMP decoder for modulated complex SPARCs.

One iteration, starting from ``beta^t`` and the previous residual:

    z^t       = y - A beta^t + (gamma^t / phi^{t-1}) * z^{t-1}
    s^t       = beta^t + (Q^t * A)^* z^t,   Q_rc = 2 tau_c / phi_r
    beta^{t+1} = eta(s^t, tau^t)

with ``gamma, phi, tau`` estimated online from ``beta^t`` and ``z^t``. Iterations
stop at ``max_iterations`` or when the stopping statistic settles; the output
is the section-wise MAP decision on the last ``s``.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from sparcmod.errors import DecoderDivergedError, DimensionMismatchError, InvalidParameterError
from sparcmod.sparc.base_matrix import BaseMatrix
from sparcmod.sparc.design import DesignOperator, WeightMatrixBlocks
from sparcmod.sparc.encoder import MessageVector, psk_constellation
from sparcmod.sparc.params import SparcParams

logger = logging.getLogger(__name__)

EXPECT_ERROR_PROXY = 1e-3


class StopStatistic(str, Enum):
    NMSE_PROXY = "nmse_proxy"
    TAU = "tau"


@dataclass(frozen=True)
class DecoderConfig:
    max_iterations: int = 100
    stop_tolerance: float = 1e-6
    stop_atol: float = 1e-12
    sigma2_known: bool = True
    stop_statistic: StopStatistic = StopStatistic.NMSE_PROXY
    tau_floor: float = 1e-12
    phi_floor: float = 1e-12

    def __post_init__(self):
        if isinstance(self.max_iterations, bool) or int(self.max_iterations) != self.max_iterations \
                or self.max_iterations < 1:
            raise InvalidParameterError(f"max_iterations must be an integer >= 1, got {self.max_iterations!r}")
        if not self.stop_tolerance >= 0 or not self.stop_atol >= 0:
            raise InvalidParameterError("stopping tolerances must be nonnegative")
        if not self.tau_floor > 0 or not self.phi_floor > 0:
            raise InvalidParameterError("tau_floor and phi_floor must be positive")
        object.__setattr__(self, "stop_statistic", StopStatistic(self.stop_statistic))

    def to_dict(self) -> dict:
        return {
            "max_iterations": self.max_iterations,
            "stop_tolerance": self.stop_tolerance,
            "stop_atol": self.stop_atol,
            "sigma2_known": self.sigma2_known,
            "stop_statistic": self.stop_statistic.value,
            "tau_floor": self.tau_floor,
            "phi_floor": self.phi_floor,
        }


@dataclass(frozen=True, eq=False)
class DecoderState:
    """Decoder variables between iterations.

    ``beta`` is the current estimate; ``z`` and ``phi`` belong to the previous
    iteration (zero / ``None`` before the first one). ``gamma``, ``tau`` and
    ``s`` are the values computed by the last iteration.
    """

    beta: np.ndarray
    z: np.ndarray
    t: int = 0
    phi: Optional[np.ndarray] = None
    gamma: Optional[np.ndarray] = None
    tau: Optional[np.ndarray] = None
    s: Optional[np.ndarray] = None
    phi_clips: int = 0

    @classmethod
    def initial(cls, params: SparcParams) -> "DecoderState":
        return cls(beta=np.zeros(params.LM, dtype=complex), z=np.zeros(params.n, dtype=complex))


class OnlineEstimates(NamedTuple):
    gamma: np.ndarray
    phi: np.ndarray
    tau: np.ndarray
    clipped: int


def _tau_per_column(tau, params: SparcParams) -> np.ndarray:
    tau = np.broadcast_to(np.asarray(tau, dtype=float), (params.col_blocks,))
    if not np.all(tau > 0):
        raise InvalidParameterError("tau must be positive in every column block")
    return tau


def section_posteriors(s: np.ndarray, tau, params: SparcParams) -> np.ndarray:
    """Posterior weights of every (location, symbol) hypothesis, shape (L, M, K).

    Each section's weights sum to one.
    """
    s = np.asarray(s, dtype=complex).ravel()
    if s.size != params.LM:
        raise DimensionMismatchError(f"s has length {s.size}, expected {params.LM}")
    tau = _tau_per_column(tau, params)
    tau_sec = np.repeat(tau, params.sections_per_block)[:, None, None]
    p = psk_constellation(params.K)
    sec = s.reshape(params.L, params.M)[:, :, None]
    # Re(conj(s) p)
    x = (sec.real * p.real + sec.imag * p.imag) / tau_sec
    x -= x.max(axis=(1, 2), keepdims=True)
    w = np.exp(x)
    w /= w.sum(axis=(1, 2), keepdims=True)
    return w


def eta(s: np.ndarray, tau, params: SparcParams) -> np.ndarray:
    """Section-wise posterior mean of beta given s = beta + sqrt(tau) CN(0, 2)."""
    w = section_posteriors(s, tau, params)
    return (w @ psk_constellation(params.K)).ravel()


def hard_decision(s: np.ndarray, params: SparcParams) -> MessageVector:
    """Per section, the (location, symbol) maximising Re(conj(s_j) p_k).

    Ties go to the lowest location, then the lowest symbol index.
    """
    s = np.asarray(s, dtype=complex).ravel()
    if s.size != params.LM:
        raise DimensionMismatchError(f"s has length {s.size}, expected {params.LM}")
    p = psk_constellation(params.K)
    sec = s.reshape(params.L, params.M)[:, :, None]
    score = (sec.real * p.real + sec.imag * p.imag).reshape(params.L, -1)
    best = score.argmax(axis=1)
    return MessageVector(best // params.K, best % params.K + 1, params.M, params.K)


def block_power_deficit(beta: np.ndarray, params: SparcParams) -> np.ndarray:
    """1 - ||beta_c||^2 / (L/C) per column block."""
    energy = (np.abs(beta) ** 2).reshape(params.col_blocks, -1).sum(axis=1)
    return 1.0 - energy / params.sections_per_block


def estimate_online(state: DecoderState, base: BaseMatrix, params: SparcParams,
                    sigma2_known: bool = True, tau_floor: float = 1e-12,
                    phi_floor: float = 1e-12) -> OnlineEstimates:
    """gamma, phi and tau estimated from ``state.beta`` and the residual ``state.z``."""
    W = base.entries
    gamma = W @ block_power_deficit(state.beta, params) / params.col_blocks
    if sigma2_known:
        phi = params.sigma2 + gamma
    else:
        phi = (np.abs(state.z) ** 2).reshape(params.row_blocks, -1).mean(axis=1)

    low = ~(phi > phi_floor)
    clipped = int(low.sum())
    if clipped:
        logger.warning("clipping %d phi estimate(s) to %g at iteration %d", clipped, phi_floor, state.t)
        phi = np.where(low, phi_floor, phi)

    inv = (W / phi[:, None]).mean(axis=0)
    tau = (params.R_nats / 2) / params.log_KM / inv
    tau = np.maximum(tau, tau_floor)
    return OnlineEstimates(gamma, phi, tau, clipped)


def amp_step(state: DecoderState, y: np.ndarray, A: DesignOperator, base: BaseMatrix,
             params: SparcParams, config: DecoderConfig = DecoderConfig()) -> DecoderState:
    W = base.entries
    gamma = W @ block_power_deficit(state.beta, params) / params.col_blocks
    z = y - A.apply(state.beta)
    if state.phi is not None:
        onsager = gamma / state.phi
        z = z + np.repeat(onsager, params.rows_per_block) * state.z

    est = estimate_online(replace(state, z=z), base, params, config.sigma2_known,
                          config.tau_floor, config.phi_floor)
    weights = WeightMatrixBlocks.from_estimates(est.tau, est.phi, est.gamma, state.phi)
    s = state.beta + A.apply_weighted_adjoint(z, weights)
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(s))):
        raise DecoderDivergedError(state.t)
    beta = eta(s, est.tau, params)
    if not np.all(np.isfinite(beta)):
        raise DecoderDivergedError(state.t)

    logger.debug("iteration %d: min phi %.4g, min tau %.4g", state.t, est.phi.min(), est.tau.min())
    return DecoderState(beta=beta, z=z, t=state.t + 1, phi=est.phi, gamma=est.gamma,
                        tau=est.tau, s=s, phi_clips=state.phi_clips + est.clipped)


@dataclass
class DecodeReport:
    """Diagnostics of one decode.

    Traces are indexed by iteration. ``proxy_trace`` and ``nmse_trace`` also
    hold the starting point, so they are one entry longer than the others.
    """

    iterations: int = 0
    converged: bool = False
    stop_statistic: str = StopStatistic.NMSE_PROXY.value
    gamma_trace: List[np.ndarray] = field(default_factory=list)
    phi_trace: List[np.ndarray] = field(default_factory=list)
    tau_trace: List[np.ndarray] = field(default_factory=list)
    proxy_trace: List[float] = field(default_factory=lambda: [1.0])
    nmse_trace: List[np.ndarray] = field(default_factory=list)
    phi_clips: int = 0
    final_soft: Optional[np.ndarray] = None
    final_s: Optional[np.ndarray] = None
    diverged_at: Optional[int] = None

    @property
    def final_proxy(self) -> float:
        return self.proxy_trace[-1]

    @property
    def expect_error(self) -> bool:
        return self.final_proxy >= EXPECT_ERROR_PROXY

    @property
    def final_nmse(self) -> Optional[float]:
        if not self.nmse_trace:
            return None
        return float(np.mean(self.nmse_trace[-1]))

    def to_dict(self, include_vectors: bool = False) -> dict:
        out = {
            "iterations": self.iterations,
            "converged": self.converged,
            "stop_statistic": self.stop_statistic,
            "gamma_trace": [g.tolist() for g in self.gamma_trace],
            "phi_trace": [p.tolist() for p in self.phi_trace],
            "tau_trace": [t.tolist() for t in self.tau_trace],
            "proxy_trace": list(self.proxy_trace),
            "nmse_trace": [v.tolist() for v in self.nmse_trace],
            "final_nmse": self.final_nmse,
            "expect_error": self.expect_error,
            "phi_clips": self.phi_clips,
            "diverged_at": self.diverged_at,
        }
        if include_vectors and self.final_soft is not None:
            out["final_soft"] = {"real": self.final_soft.real.tolist(),
                                 "imag": self.final_soft.imag.tolist()}
        return out


def _settled(change: float, reference: float, config: DecoderConfig) -> bool:
    if math.isinf(config.stop_tolerance):
        return True
    return change <= config.stop_tolerance * abs(reference) + config.stop_atol


def decode(y: np.ndarray, A: DesignOperator, base: BaseMatrix, params: SparcParams,
           config: DecoderConfig = DecoderConfig(),
           truth: Optional[MessageVector] = None) -> Tuple[MessageVector, DecodeReport]:
    """Run AMP on ``y`` and return the hard decision with its report.

    If ``truth`` is given the report also tracks per-block NMSE.
    """
    y = np.asarray(y, dtype=complex).ravel()
    if y.size != params.n:
        raise DimensionMismatchError(f"y has length {y.size}, expected {params.n}")
    truth_values = truth.values if truth is not None else None

    report = DecodeReport(stop_statistic=config.stop_statistic.value)
    state = DecoderState.initial(params)
    if truth_values is not None:
        report.nmse_trace.append(_block_nmse(state.beta, truth_values, params))

    for _ in range(config.max_iterations):
        prev_tau = state.tau
        try:
            state = amp_step(state, y, A, base, params, config)
        except DecoderDivergedError as exc:
            report.diverged_at = exc.iteration
            report.phi_clips = state.phi_clips
            logger.warning("decoder diverged at iteration %d", exc.iteration)
            raise DecoderDivergedError(exc.iteration, report) from exc

        proxy = float(block_power_deficit(state.beta, params).mean())
        report.iterations = state.t
        report.gamma_trace.append(state.gamma)
        report.phi_trace.append(state.phi)
        report.tau_trace.append(state.tau)
        prev_proxy = report.proxy_trace[-1]
        report.proxy_trace.append(proxy)
        if truth_values is not None:
            report.nmse_trace.append(_block_nmse(state.beta, truth_values, params))

        if config.stop_statistic is StopStatistic.NMSE_PROXY:
            done = _settled(abs(proxy - prev_proxy), prev_proxy, config)
        elif prev_tau is None:
            done = math.isinf(config.stop_tolerance)
        else:
            done = _settled(float(np.max(np.abs(state.tau - prev_tau))),
                            float(np.max(np.abs(prev_tau))), config)
        if done:
            report.converged = True
            break

    report.phi_clips = state.phi_clips
    report.final_soft = state.beta
    report.final_s = state.s
    logger.debug("decode finished after %d iteration(s), proxy %.3g", report.iterations, report.final_proxy)
    return hard_decision(state.s, params), report


def _block_nmse(beta: np.ndarray, truth: np.ndarray, params: SparcParams) -> np.ndarray:
    err = (np.abs(beta - truth) ** 2).reshape(params.col_blocks, -1).sum(axis=1)
    return err / params.sections_per_block
