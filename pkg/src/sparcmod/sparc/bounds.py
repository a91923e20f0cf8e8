"""
Closed-form bound calculators for the state evolution and the section error rate.

The bound expressions contain universal constants with no known numerical
values (kappa_1..kappa_4 in f/h, alpha in the lower bound on psi). They are
inputs here, defaulting to 1, and every report says which values were used.
"""

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from sparcmod.errors import InvalidParameterError
from sparcmod.sparc.base_matrix import BaseMatrix, row_col_averages
from sparcmod.sparc.params import SparcParams
from sparcmod.utils.numeric import is_power_of_two

ABOVE = "above"
BELOW = "below"
MIDDLE = "middle"


def _check_K(K: int) -> int:
    if not is_power_of_two(K):
        raise InvalidParameterError(f"K must be a power of two, got {K!r}")
    return int(K)


def _cot_term(K: int) -> float:
    return 1.0 + 1.0 / math.tan(2 * math.pi / K)


def f_KM(K: int, M: int, delta: float, kappas: Sequence[float] = (1, 1, 1, 1)) -> float:
    K = _check_K(K)
    k1, k2, k3, k4 = kappas
    if K == 1:
        return M ** (-k1 * delta ** 2) / (delta * math.sqrt(math.log(M)))
    if K == 2:
        return (2 * M) ** (-k2 * delta ** 2) / (delta * math.sqrt(math.log(2 * M)))
    if K == 4:
        return (4 * M) ** (-k3 * delta ** 2) / (delta * math.sqrt(math.log(4 * M)))
    c = _cot_term(K)
    KM = K * M
    return (c * KM ** (-k4 * delta ** 2 / c ** 2) / (delta * math.sqrt(math.log(KM)))
            + K * KM ** (-2 * (2 + delta ** 2) * math.sin(math.pi / K) ** 2))


def h_KM(K: int, M: int, nu: float) -> float:
    K = _check_K(K)
    if K == 1:
        return 0.0
    if K == 2:
        return (2 * M) ** (-nu / 2) / math.sqrt(2 * math.pi * nu * math.log(2 * M))
    if K == 4:
        return 2 * (4 * M) ** (-nu / 2) / math.sqrt(2 * math.pi * nu * math.log(4 * M))
    c = _cot_term(K)
    KM = K * M
    return 2 * c * KM ** (-nu / (2 * c ** 2)) / math.sqrt(2 * math.pi * nu * math.log(KM))


def ser_bound_constant(K: int) -> float:
    """c(K) with SER <= c(K) * NMSE for any AMP soft estimate."""
    K = _check_K(K)
    if K <= 4:
        return 4.0
    return math.sin(math.pi / K) ** -4


def se_ser_bound(psi: np.ndarray, K: int) -> float:
    """SER bound predicted from the SE per-block NMSE."""
    return min(1.0, ser_bound_constant(K) * float(np.mean(psi)))


@dataclass(frozen=True)
class BoundsReport:
    K: int
    M: int
    delta: float
    delta_tilde: float
    nu: Tuple[float, ...]
    f: float
    h: Tuple[float, ...]
    classification: Tuple[str, ...]
    psi_upper: Tuple[float, ...]
    psi_lower: Tuple[float, ...]
    ser_constant: float
    kappas: Tuple[float, ...]
    alpha: float
    nu_lower: Optional[float] = None
    nu_upper: Optional[float] = None
    nu_bounds_note: Optional[str] = None

    @property
    def banner(self) -> str:
        return (f"constants assumed: kappa_1..4={list(self.kappas)}, alpha={self.alpha} "
                f"(universal constants without known values)")

    def to_dict(self) -> dict:
        return {
            "banner": self.banner,
            "K": self.K,
            "M": self.M,
            "delta": self.delta,
            "delta_tilde": self.delta_tilde,
            "nu": list(self.nu),
            "f": self.f,
            "h": list(self.h),
            "classification": list(self.classification),
            "psi_upper": list(self.psi_upper),
            "psi_lower": list(self.psi_lower),
            "ser_constant": self.ser_constant,
            "nu_lower": self.nu_lower,
            "nu_upper": self.nu_upper,
            "nu_bounds_note": self.nu_bounds_note,
        }


def classify_nu(nu: float, delta: float, delta_tilde: float) -> str:
    if nu > 2 + delta:
        return ABOVE
    if nu < 2 - delta_tilde:
        return BELOW
    return MIDDLE


def nu_regime_bounds(nu_c: Sequence[float], K: int, M: int, delta: float, delta_tilde: float,
                     kappas: Sequence[float] = (1, 1, 1, 1), alpha: float = 1.0) -> BoundsReport:
    """f, h and the psi bounds they imply for every column block's nu."""
    K = _check_K(K)
    if not is_power_of_two(M) or K * M < 2:
        raise InvalidParameterError(f"M must be a power of two with KM >= 2, got M={M!r}, K={K}")
    if not 0 < delta < 0.5:
        raise InvalidParameterError(f"delta must lie in (0, 1/2), got {delta!r}")
    if not 0 < delta_tilde < 1:
        raise InvalidParameterError(f"delta_tilde must lie in (0, 1), got {delta_tilde!r}")
    kappas = tuple(float(k) for k in kappas)
    if len(kappas) != 4 or min(kappas) <= 0 or not alpha > 0:
        raise InvalidParameterError("need four positive kappa constants and a positive alpha")
    nu = tuple(float(v) for v in np.atleast_1d(nu_c))
    if not nu or min(nu) <= 0:
        raise InvalidParameterError("every nu_c must be positive")

    f = f_KM(K, M, delta, kappas)
    h = tuple(h_KM(K, M, v) for v in nu)
    cls = tuple(classify_nu(v, delta, delta_tilde) for v in nu)
    upper = tuple(f if c == ABOVE else 1 + hv for c, hv in zip(cls, h))
    lower = tuple(1 - M ** (-alpha * delta_tilde ** 2) if c == BELOW else 0.0 for c in cls)
    return BoundsReport(K=K, M=M, delta=delta, delta_tilde=delta_tilde, nu=nu, f=f, h=h,
                        classification=cls, psi_upper=upper, psi_lower=lower,
                        ser_constant=ser_bound_constant(K), kappas=kappas, alpha=alpha)


class NuBounds(NamedTuple):
    lower: Optional[float]
    upper: Optional[float]
    available: bool
    reason: str = ""


def nu_bounds(base: BaseMatrix, params: SparcParams, rate_nats: Optional[float] = None) -> NuBounds:
    """Range that every SE nu_c must fall in, from the row/column averages of W."""
    avgs = row_col_averages(base)
    rate = params.R_nats if rate_nats is None else rate_nats
    if avgs.xi1 <= 0:
        return NuBounds(None, None, False, "xi1 = 0: some row or column block average is zero")
    lower = (2 / rate) * avgs.xi1 / (params.sigma2 + 2 * avgs.xi2)
    upper = (2 / rate) * avgs.xi2 / params.sigma2
    return NuBounds(lower, upper, True)


def initial_nu(base: BaseMatrix, params: SparcParams) -> np.ndarray:
    """nu_c at the first iteration (psi = 1), computed exactly."""
    W = base.entries
    phi = params.sigma2 + W.mean(axis=1)
    return (2 / params.R_nats) * (W / phi[:, None]).mean(axis=0)


@dataclass(frozen=True)
class CouplingThresholds:
    vartheta: float
    capacity: float
    R_star: float
    omega_star: Optional[float]
    rho_default: Optional[float]
    T_sc: Optional[int]
    T_pa: Optional[int]
    notes: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "vartheta": self.vartheta,
            "capacity": self.capacity,
            "R_star": self.R_star,
            "omega_star": self.omega_star,
            "rho_default": self.rho_default,
            "T_sc": self.T_sc,
            "T_pa": self.T_pa,
            "notes": list(self.notes),
        }


def coupling_thresholds(omega: int, Lambda: int, snr: float, R_nats: float) -> CouplingThresholds:
    """Coupling and power-allocation parameters under which asymptotic SE reaches zero.

    Quantities that are undefined at the given rate are None, with a note.
    """
    if int(omega) != omega or omega < 1 or int(Lambda) != Lambda or Lambda < 2 * omega - 1:
        raise InvalidParameterError(f"need omega >= 1 and Lambda >= 2*omega-1, got ({omega!r}, {Lambda!r})")
    if not snr > 0 or not R_nats > 0:
        raise InvalidParameterError("snr and rate must be positive")
    notes: List[str] = []
    vartheta = 1 + (omega - 1) / Lambda
    capacity = math.log1p(snr)
    R_star = math.log1p(vartheta * snr) / vartheta

    omega_star = rho = T_sc = None
    if R_nats < R_star:
        gap = R_star - R_nats
        omega_star = vartheta * snr ** 2 / ((1 + vartheta * snr) * gap)
        rho = min(0.5, gap / (3 * snr))
        T_sc = math.ceil(Lambda * omega_star / (2 * omega))
        if omega <= omega_star:
            notes.append(f"omega={omega} does not exceed omega*={omega_star:.4g}")
    else:
        notes.append(f"R={R_nats:.6g} >= R*={R_star:.6g}: omega*, rho and T_sc undefined")

    T_pa = None
    if R_nats < capacity:
        T_pa = math.ceil(capacity / math.log(capacity / R_nats))
    else:
        notes.append(f"R={R_nats:.6g} >= C={capacity:.6g}: T_pa undefined")
    return CouplingThresholds(vartheta, capacity, R_star, omega_star, rho, T_sc, T_pa, tuple(notes))


def growth_gauge(K: int, delta: float, nu_min: float, kappa4: float = 1.0) -> float:
    """g(K): f and h vanish as K, M grow whenever M / g(K) diverges.

    Meant for K >= 8; overflow saturates to infinity.
    """
    K = _check_K(K)
    if K < 8:
        raise InvalidParameterError(f"the gauge is defined for K >= 8, got {K}")
    c = _cot_term(K)
    try:
        terms = [
            c ** (c ** 2 / (kappa4 * delta ** 2)),
            c ** (2 * c ** 2 / nu_min),
            K ** (1 / (2 * (2 + delta ** 2) * math.sin(math.pi / K) ** 2)),
        ]
    except OverflowError:
        return math.inf
    return max(terms) / K
