"""
State evolution: offline prediction of the per-block NMSE of the AMP decoder.

The finite-M recursion starts at psi = 1 and repeats

    gamma_r = (1/C) sum_c W_rc psi_c,      phi_r = sigma2 + gamma_r
    tau_c   = (R/2) / ln(KM) * [ (1/R) sum_r W_rc / phi_r ]^-1
    psi_c  <- 1 - E(tau_c)

where E(tau) is an M-dimensional expectation estimated by Monte Carlo. The
asymptotic (M -> infinity) recursion replaces E by a threshold indicator and
does not depend on K.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional

import numpy as np
import pandas as pd

from sparcmod.errors import InvalidParameterError
from sparcmod.sparc.base_matrix import BaseMatrix
from sparcmod.sparc.encoder import psk_constellation
from sparcmod.sparc.params import SparcParams
from sparcmod.utils.numeric import exact_sum, is_power_of_two
from sparcmod.utils.seeding import SeedLike, as_seed_sequence

logger = logging.getLogger(__name__)

COMPLEX_RATE_FACTOR = 0.5
EARLY_EXIT_PSI = 1e-6
SE_COLUMNS = ["t", "block", "gamma", "phi", "tau", "psi", "nu", "psi_std_err"]


class MCEstimate(NamedTuple):
    estimate: float
    std_error: float


@dataclass(frozen=True)
class MCConfig:
    """Monte Carlo settings for E(tau).

    Draws are split into chunks of at most ``max_chunk_elements`` Gaussians,
    each with its own spawned seed, so the estimate is identical for any
    ``workers`` value.
    """

    num_samples: int = 10_000
    seed: int = 0
    workers: int = 1
    max_chunk_elements: int = 2 ** 22

    def __post_init__(self):
        if int(self.num_samples) != self.num_samples or self.num_samples < 1:
            raise InvalidParameterError(f"num_samples must be >= 1, got {self.num_samples!r}")
        if self.workers < 1:
            raise InvalidParameterError(f"workers must be >= 1, got {self.workers!r}")


def _chunk_sizes(num_samples: int, M: int, K: int, max_chunk_elements: int) -> List[int]:
    per_chunk = max(1, max_chunk_elements // (M * K))
    full, rest = divmod(num_samples, per_chunk)
    return [per_chunk] * full + ([rest] if rest else [])


def _E_tau_samples(tau: float, M: int, K: int, size: int, seed: np.random.SeedSequence) -> np.ndarray:
    """Per-draw ratios inside E(tau), with the sent symbol p_K = 1 at position 0."""
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((size, M)) + 1j * rng.standard_normal((size, M))
    s = math.sqrt(tau) * u
    s[:, 0] += 1.0
    p = psk_constellation(K)
    x = (s.real[:, :, None] * p.real + s.imag[:, :, None] * p.imag) / tau
    x -= x.max(axis=(1, 2), keepdims=True)
    w = np.exp(x)
    return (w[:, 0, :] @ p.real) / w.sum(axis=(1, 2))


def mc_E_tau(tau: float, M: int, K: int, num_samples: int, seed: SeedLike,
             workers: int = 1, max_chunk_elements: int = 2 ** 22) -> MCEstimate:
    """Monte Carlo estimate of E(tau) and its standard error.

    The same ``seed`` gives the same underlying Gaussian draws for every tau.
    """
    if not tau > 0:
        raise InvalidParameterError(f"tau must be positive, got {tau!r}")
    if not is_power_of_two(M) or not is_power_of_two(K):
        raise InvalidParameterError(f"M and K must be powers of two, got M={M!r}, K={K!r}")
    if int(num_samples) != num_samples or num_samples < 1:
        raise InvalidParameterError(f"num_samples must be >= 1, got {num_samples!r}")

    sizes = _chunk_sizes(int(num_samples), M, K, max_chunk_elements)
    seeds = as_seed_sequence(seed).spawn(len(sizes))
    jobs = list(zip(sizes, seeds))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _E_tau_samples(tau, M, K, job[0], job[1]), jobs))
    else:
        parts = [_E_tau_samples(tau, M, K, size, s) for size, s in jobs]

    values = np.concatenate(parts)
    mean = exact_sum(values) / values.size
    if values.size > 1:
        var = exact_sum((values - mean) ** 2) / (values.size - 1)
        stderr = math.sqrt(var / values.size)
    else:
        stderr = float("nan")
    return MCEstimate(mean, stderr)


@dataclass(frozen=True, eq=False)
class SEState:
    """SE quantities at iteration t: psi^t and what it implies for that iteration."""

    t: int
    psi: np.ndarray
    psi_stderr: np.ndarray
    gamma: np.ndarray
    phi: np.ndarray
    tau: np.ndarray
    nu: np.ndarray


def _derived(psi: np.ndarray, base: BaseMatrix, params: SparcParams, rate_factor: float,
             rate_nats: Optional[float]):
    W = base.entries
    rate = params.R_nats if rate_nats is None else rate_nats
    gamma = W @ psi / base.col_blocks
    phi = params.sigma2 + gamma
    inv = (W / phi[:, None]).mean(axis=0)
    tau = rate_factor * rate / params.log_KM / inv
    nu = 1.0 / (tau * params.log_KM)
    return gamma, phi, tau, nu


def initial_se_state(base: BaseMatrix, params: SparcParams, rate_factor: float = COMPLEX_RATE_FACTOR,
                     rate_nats: Optional[float] = None) -> SEState:
    psi = np.ones(base.col_blocks)
    gamma, phi, tau, nu = _derived(psi, base, params, rate_factor, rate_nats)
    return SEState(0, psi, np.zeros_like(psi), gamma, phi, tau, nu)


def se_step(state: SEState, base: BaseMatrix, params: SparcParams, mc_config: MCConfig = MCConfig(),
            rate_factor: float = COMPLEX_RATE_FACTOR, rate_nats: Optional[float] = None,
            cache: Optional[Dict[float, MCEstimate]] = None) -> SEState:
    """Advance one iteration.

    ``rate_factor`` is the multiplier of the rate in tau (1/2 for complex
    codes); ``rate_nats`` overrides the code rate. ``cache`` maps tau to an
    E(tau) estimate and is shared across steps of one run.
    """
    if cache is None:
        cache = {}
    psi = np.empty(base.col_blocks)
    stderr = np.empty(base.col_blocks)
    for c, tau_c in enumerate(state.tau):
        key = float(tau_c)
        if key not in cache:
            cache[key] = mc_E_tau(key, params.M, params.K, mc_config.num_samples, mc_config.seed,
                                  mc_config.workers, mc_config.max_chunk_elements)
        est = cache[key]
        psi[c] = 1.0 - est.estimate
        stderr[c] = est.std_error
    gamma, phi, tau, nu = _derived(psi, base, params, rate_factor, rate_nats)
    return SEState(state.t + 1, psi, stderr, gamma, phi, tau, nu)


@dataclass
class SETrajectory:
    states: List[SEState] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, t: int) -> SEState:
        return self.states[t]

    @property
    def psi(self) -> np.ndarray:
        """psi^t for every iteration, shape (T+1, C)."""
        return np.array([s.psi for s in self.states])

    @property
    def nu(self) -> np.ndarray:
        return np.array([s.nu for s in self.states])

    def to_frame(self) -> pd.DataFrame:
        """Long format, one row per (t, block); quantities absent for a block are NaN."""
        rows = []
        for s in self.states:
            n_rows, n_cols = s.gamma.size, s.psi.size
            for b in range(max(n_rows, n_cols)):
                row_ok, col_ok = b < n_rows, b < n_cols
                rows.append({
                    "t": s.t,
                    "block": b,
                    "gamma": s.gamma[b] if row_ok else np.nan,
                    "phi": s.phi[b] if row_ok else np.nan,
                    "tau": s.tau[b] if col_ok else np.nan,
                    "psi": s.psi[b] if col_ok else np.nan,
                    "nu": s.nu[b] if col_ok else np.nan,
                    "psi_std_err": s.psi_stderr[b] if col_ok else np.nan,
                })
        return pd.DataFrame(rows, columns=SE_COLUMNS)


def run_se(base: BaseMatrix, params: SparcParams, T_max: int, mc_config: MCConfig = MCConfig(),
           rate_factor: float = COMPLEX_RATE_FACTOR, rate_nats: Optional[float] = None) -> SETrajectory:
    """Iterate up to T_max steps, stopping early once every psi is below 1e-6."""
    if int(T_max) != T_max or T_max < 1:
        raise InvalidParameterError(f"T_max must be >= 1, got {T_max!r}")
    state = initial_se_state(base, params, rate_factor, rate_nats)
    trajectory = SETrajectory([state])
    cache: Dict[float, MCEstimate] = {}
    for _ in range(int(T_max)):
        state = se_step(state, base, params, mc_config, rate_factor, rate_nats, cache)
        trajectory.states.append(state)
        logger.debug("SE t=%d: mean psi %.4g", state.t, state.psi.mean())
        if state.psi.max() < EARLY_EXIT_PSI:
            break
    logger.info("SE finished after %d step(s); final mean psi %.4g",
                len(trajectory) - 1, trajectory.states[-1].psi.mean())
    return trajectory


def asymptotic_se_step(psi_bar: np.ndarray, base: BaseMatrix, sigma2: float, rate_nats: float) -> np.ndarray:
    """One step of the M -> infinity recursion; no dependence on K."""
    W = base.entries
    psi_bar = np.asarray(psi_bar, dtype=float)
    if psi_bar.shape != (base.col_blocks,):
        raise InvalidParameterError(f"psi_bar must have shape ({base.col_blocks},), got {psi_bar.shape}")
    phi_bar = sigma2 + W @ psi_bar / base.col_blocks
    snr_c = (W / phi_bar[:, None]).mean(axis=0)
    return np.where(snr_c > rate_nats, 0.0, 1.0)


def run_asymptotic_se(base: BaseMatrix, sigma2: float, rate_nats: float, T_max: int) -> List[np.ndarray]:
    """psi_bar trajectory from all-ones; stops at all-zeros or at a fixed point."""
    psi = np.ones(base.col_blocks)
    trajectory = [psi]
    for _ in range(int(T_max)):
        nxt = asymptotic_se_step(psi, base, sigma2, rate_nats)
        trajectory.append(nxt)
        if not nxt.any() or np.array_equal(nxt, psi):
            break
        psi = nxt
    return trajectory
