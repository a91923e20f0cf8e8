"""
Monte Carlo driver: trials per sweep point, sweeps, and AMP-versus-SE tables.

A trial is fully determined by ``(master_seed, point_index, trial_index)``.
Trials run serially or on a process pool; outcomes are sorted by trial index
before they are reduced, so aggregates do not depend on scheduling.
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from functools import lru_cache
from typing import Callable, Iterable, List, NamedTuple, Optional

import numpy as np
import pandas as pd

from sparcmod.errors import DecoderDivergedError, SparcError
from sparcmod.harness.config import PointSetup, RunConfig
from sparcmod.harness.output import results_frame
from sparcmod.sparc.amp import decode
from sparcmod.sparc.base_matrix import BaseKind
from sparcmod.sparc.channel import add_awgn
from sparcmod.sparc.design import DesignOperator, build_operator
from sparcmod.sparc.encoder import BitPayload, bits_to_message, encode
from sparcmod.sparc.metrics import FrameResult, evaluate_frame
from sparcmod.sparc.state_evolution import MCConfig, SETrajectory, run_se
from sparcmod.utils.numeric import exact_sum
from sparcmod.utils.seeding import point_seed, trial_streams

logger = logging.getLogger(__name__)

COMPARE_COLUMNS = ["iter", "block", "psi_se", "psi_se_stderr",
                   "nmse_amp_mean", "nmse_amp_stderr", "abs_dev"]

# Scored in place of a frame whose decoder diverged: every section wrong and
# the bits no better than a coin flip.
DIVERGED_FRAME = FrameResult(ser=1.0, ber=0.5, frame_error=True, location_error_rate=1.0,
                             value_error_rate=1.0, nmse_per_block=(), nmse_total=math.nan,
                             iterations=0, ser_bound_ok=True)


class TrialJob(NamedTuple):
    config: RunConfig
    point_index: int
    trial_index: int
    ebn0_db: float
    keep_trace: bool = False


@dataclass(frozen=True)
class TrialOutcome:
    trial_index: int
    frame: FrameResult
    diverged: bool
    nmse_trace: Optional[tuple] = None


@dataclass(frozen=True)
class PointResult:
    """Aggregate over the trials of one sweep point, with binomial and per-frame standard errors."""

    ebn0_db: float
    sigma2: float
    K: int
    M: int
    L: int
    n: int
    R_bits_per_dim: float
    omega: Optional[int]
    Lambda: Optional[int]
    rho: Optional[float]
    operator: str
    trials: int
    ser: float
    ser_stderr: float
    ber: float
    ber_stderr: float
    fer: float
    fer_stderr: float
    loc_err: float
    val_err: float
    mean_iters: float
    diverged: int = 0
    ser_bound_violations: int = 0
    # Spread of the per-frame rates; errors inside one frame are not independent.
    ser_frame_stderr: float = math.nan
    ber_frame_stderr: float = math.nan

    def to_dict(self) -> dict:
        return asdict(self)


def binomial_stderr(p: float, count: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / count)


def frame_stderr(values) -> float:
    """Standard error of the mean of per-frame values; NaN for a single frame."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return math.nan
    return float(values.std(ddof=1) / math.sqrt(values.size))


@lru_cache(maxsize=4)
def _fixed_operator(config: RunConfig, point_index: int, ebn0_db: float) -> DesignOperator:
    setup = config.point(ebn0_db)
    return build_operator(config.operator.kind, setup.base, setup.params,
                          point_seed(config.run.master_seed, point_index),
                          max_entries=config.operator.max_entries)


def run_trial(job: TrialJob) -> TrialOutcome:
    """Draw payload, operator and noise for one trial, decode, and score it."""
    config = job.config
    setup = config.point(job.ebn0_db)
    params = setup.params
    streams = trial_streams(config.run.master_seed, job.point_index, job.trial_index)

    payload = config.payload()
    if payload is None:
        payload = BitPayload.random(params.total_bits, streams.payload)
    message = bits_to_message(payload, params)
    if config.operator.fresh_per_trial:
        A = build_operator(config.operator.kind, setup.base, params, streams.operator,
                           max_entries=config.operator.max_entries)
    else:
        A = _fixed_operator(config, job.point_index, job.ebn0_db)
    y = add_awgn(encode(A, message), params.sigma2, streams.noise)

    try:
        decoded, report = decode(y, A, setup.base, params, config.decoder, truth=message)
    except DecoderDivergedError as exc:
        logger.warning("trial %d at %.3g dB diverged at iteration %d",
                       job.trial_index, job.ebn0_db, exc.iteration)
        return TrialOutcome(job.trial_index, replace(DIVERGED_FRAME, iterations=exc.iteration), True)

    frame = evaluate_frame(decoded, message, report.final_soft, params, report.iterations,
                           config.run.value_error_convention)
    trace = tuple(report.nmse_trace) if job.keep_trace else None
    return TrialOutcome(job.trial_index, frame, False, trace)


def _execute(jobs: List[TrialJob], workers: int) -> List[TrialOutcome]:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_trial, jobs))
    else:
        outcomes = [run_trial(job) for job in jobs]
    return sorted(outcomes, key=lambda o: o.trial_index)


def aggregate(outcomes: Iterable[TrialOutcome], setup: PointSetup, config: RunConfig) -> PointResult:
    """Reduce trial outcomes to a :class:`PointResult`; the order of ``outcomes`` is irrelevant."""
    outcomes = sorted(outcomes, key=lambda o: o.trial_index)
    if not outcomes:
        raise SparcError("no trial outcomes to aggregate")
    params = setup.params
    trials = len(outcomes)
    frames = [o.frame for o in outcomes]

    def mean(attr: str) -> float:
        return exact_sum(float(getattr(f, attr)) for f in frames) / trials

    ser, ber, fer = mean("ser"), mean("ber"), mean("frame_error")
    ser_bound_violations = sum(not f.ser_bound_ok for f in frames)
    if ser_bound_violations:
        logger.warning("%d frame(s) at %.3g dB broke the SER <= c(K) NMSE bound",
                       ser_bound_violations, setup.ebn0_db)
    sc = config.base.kind is BaseKind.SPATIALLY_COUPLED
    return PointResult(
        ebn0_db=setup.ebn0_db, sigma2=params.sigma2, K=params.K, M=params.M, L=params.L, n=params.n,
        R_bits_per_dim=params.rate_bits_per_dim,
        omega=setup.base.omega if sc else None,
        Lambda=setup.base.Lambda if sc else None,
        rho=setup.base.rho if sc else None,
        operator=config.operator.kind.value, trials=trials,
        ser=ser, ser_stderr=binomial_stderr(ser, trials * params.L),
        ber=ber, ber_stderr=binomial_stderr(ber, trials * params.total_bits),
        fer=fer, fer_stderr=binomial_stderr(fer, trials),
        loc_err=mean("location_error_rate"), val_err=mean("value_error_rate"),
        mean_iters=mean("iterations"),
        diverged=sum(o.diverged for o in outcomes),
        ser_bound_violations=ser_bound_violations,
        ser_frame_stderr=frame_stderr([f.ser for f in frames]),
        ber_frame_stderr=frame_stderr([f.ber for f in frames]),
    )


def run_trials(config: RunConfig, ebn0_db: float, point_index: int = 0) -> List[TrialOutcome]:
    """Every trial of one sweep point, in trial order."""
    jobs = [TrialJob(config, point_index, t, float(ebn0_db)) for t in range(config.run.trials)]
    return _execute(jobs, config.run.workers)


def run_point(config: RunConfig, ebn0_db: float, point_index: int = 0) -> PointResult:
    setup = config.point(ebn0_db)
    started = time.perf_counter()
    result = aggregate(run_trials(config, ebn0_db, point_index), setup, config)
    logger.info("point %d (%.3g dB): SER %.3g, BER %.3g, FER %.3g over %d trials in %.1fs",
                point_index, ebn0_db, result.ser, result.ber, result.fer, result.trials,
                time.perf_counter() - started)
    return result


@dataclass
class SweepResult:
    points: List[PointResult]
    wall_time: float

    def to_frame(self) -> pd.DataFrame:
        return results_frame(self.points)


def run_sweep(config: RunConfig,
              progress: Optional[Callable[[PointResult], None]] = None) -> SweepResult:
    """Run every sweep point in order."""
    started = time.perf_counter()
    points = []
    for p, ebn0 in enumerate(config.sweep_points()):
        result = run_point(config, ebn0, p)
        points.append(result)
        if progress is not None:
            progress(result)
    return SweepResult(points, time.perf_counter() - started)


def se_for_point(config: RunConfig, ebn0_db: Optional[float] = None) -> SETrajectory:
    """SE trajectory matching one sweep point (the first one by default)."""
    ebn0 = config.sweep_points()[0] if ebn0_db is None else ebn0_db
    setup = config.point(ebn0)
    mc = MCConfig(num_samples=config.se.mc_samples, seed=config.se.mc_seed,
                  workers=config.run.workers)
    return run_se(setup.base, setup.params, config.se.T_max, mc)


def _pad(rows: List[np.ndarray], length: int) -> np.ndarray:
    """Stack per-iteration rows, repeating the last row up to ``length``."""
    rows = list(rows) + [rows[-1]] * (length - len(rows))
    return np.array(rows[:length])


def run_se_compare(config: RunConfig, ebn0_db: Optional[float] = None) -> pd.DataFrame:
    """Mean per-block AMP NMSE against the SE prediction at every iteration.

    Decoders that stop early, and an SE run that exits early, hold their last
    value for the remaining iterations.
    """
    ebn0 = config.sweep_points()[0] if ebn0_db is None else float(ebn0_db)
    trials = config.se.compare_trials
    jobs = [TrialJob(config, 0, t, ebn0, keep_trace=True) for t in range(trials)]
    outcomes = [o for o in _execute(jobs, config.run.workers) if not o.diverged]
    if not outcomes:
        raise SparcError(f"every one of {trials} decode(s) diverged at {ebn0:.3g} dB")
    if len(outcomes) < trials:
        logger.warning("%d of %d decode(s) diverged and are left out", trials - len(outcomes), trials)

    trajectory = se_for_point(config, ebn0)
    length = max(len(trajectory), max(len(o.nmse_trace) for o in outcomes))
    psi = _pad([s.psi for s in trajectory.states], length)
    psi_err = _pad([s.psi_stderr for s in trajectory.states], length)
    amp = np.stack([_pad(o.nmse_trace, length) for o in outcomes])

    amp_mean = amp.mean(axis=0)
    if amp.shape[0] > 1:
        amp_err = amp.std(axis=0, ddof=1) / math.sqrt(amp.shape[0])
    else:
        amp_err = np.full_like(amp_mean, np.nan)

    t_idx, b_idx = np.meshgrid(np.arange(length), np.arange(psi.shape[1]), indexing="ij")
    return pd.DataFrame({
        "iter": t_idx.ravel(),
        "block": b_idx.ravel(),
        "psi_se": psi.ravel(),
        "psi_se_stderr": psi_err.ravel(),
        "nmse_amp_mean": amp_mean.ravel(),
        "nmse_amp_stderr": amp_err.ravel(),
        "abs_dev": np.abs(amp_mean - psi).ravel(),
    }, columns=COMPARE_COLUMNS)
