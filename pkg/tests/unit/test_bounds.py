import math

import numpy as np
import pytest

from sparcmod.errors import InvalidParameterError
from sparcmod.sparc.base_matrix import build_sc
from sparcmod.sparc.bounds import (ABOVE, BELOW, MIDDLE, classify_nu, coupling_thresholds, f_KM,
                                   growth_gauge, h_KM, initial_nu, nu_bounds, nu_regime_bounds,
                                   se_ser_bound, ser_bound_constant)
from sparcmod.sparc.params import SparcParams


class TestSerConstant:
    """Test c(K) in SER <= c(K) NMSE."""

    @pytest.mark.parametrize("K", [1, 2, 4])
    def test_small_K(self, K):
        assert ser_bound_constant(K) == 4.0

    def test_eight_psk(self):
        assert ser_bound_constant(8) == pytest.approx(46.63, abs=0.01)

    def test_grows_with_K(self):
        assert ser_bound_constant(16) > ser_bound_constant(8)

    def test_se_bound_is_capped(self):
        assert se_ser_bound(np.array([0.5, 0.5]), 2) == 1.0
        assert se_ser_bound(np.array([0.001, 0.003]), 2) == pytest.approx(0.008)


class TestFH:
    """Test the f and h functions."""

    def test_h_unmodulated_is_zero(self):
        assert h_KM(1, 64, 2.5) == 0.0

    def test_h_bpsk(self):
        M, nu = 64, 2.5
        expected = (2 * M) ** (-nu / 2) / math.sqrt(2 * math.pi * nu * math.log(2 * M))
        assert h_KM(2, M, nu) == pytest.approx(expected)

    def test_h_qpsk_doubles_form(self):
        M, nu = 64, 2.5
        expected = 2 * (4 * M) ** (-nu / 2) / math.sqrt(2 * math.pi * nu * math.log(4 * M))
        assert h_KM(4, M, nu) == pytest.approx(expected)

    @pytest.mark.parametrize("K", [1, 2, 4, 8])
    def test_f_decays_in_M(self, K):
        values = [f_KM(K, M, 0.3) for M in (2 ** 8, 2 ** 12, 2 ** 16)]
        assert values[0] > values[1] > values[2] > 0

    @pytest.mark.parametrize("K", [2, 4, 8])
    def test_h_decays_in_M(self, K):
        assert h_KM(K, 2 ** 16, 2.5) < h_KM(K, 2 ** 8, 2.5)

    def test_invalid_K(self):
        with pytest.raises(InvalidParameterError):
            h_KM(3, 64, 1.0)


class TestNuRegimeBounds:
    """Test the nu classification and the psi bounds."""

    @pytest.mark.parametrize("nu,expected", [(2.5, ABOVE), (1.5, BELOW), (2.0, MIDDLE), (2.1, MIDDLE)])
    def test_classify(self, nu, expected):
        assert classify_nu(nu, 0.2, 0.2) == expected

    def test_report(self):
        report = nu_regime_bounds([2.5, 1.0, 2.0], K=4, M=256, delta=0.2, delta_tilde=0.3)
        assert report.classification == (ABOVE, BELOW, MIDDLE)
        assert report.psi_upper[0] == pytest.approx(report.f)
        assert report.psi_upper[1] == pytest.approx(1 + report.h[1])
        assert report.psi_lower[1] == pytest.approx(1 - 256 ** (-0.09))
        assert report.psi_lower[0] == 0.0
        assert report.ser_constant == 4.0
        assert "kappa" in report.banner
        assert report.to_dict()["banner"] == report.banner

    @pytest.mark.parametrize("kwargs", [
        {"delta": 0.5}, {"delta": 0.0}, {"delta_tilde": 1.0}, {"kappas": (1, 1, 1)}, {"alpha": 0.0},
    ])
    def test_invalid(self, kwargs):
        args = {"delta": 0.2, "delta_tilde": 0.3}
        args.update(kwargs)
        with pytest.raises(InvalidParameterError):
            nu_regime_bounds([2.0], K=2, M=64, **args)

    def test_nonpositive_nu(self):
        with pytest.raises(InvalidParameterError, match="nu"):
            nu_regime_bounds([0.0], K=2, M=64, delta=0.2, delta_tilde=0.3)


class TestNuBounds:
    """Test the range of the SE nu and its first value."""

    def test_flat(self, flat_params, flat_base):
        bounds = nu_bounds(flat_base, flat_params)
        R, s2 = flat_params.R_nats, flat_params.sigma2
        assert bounds.lower == pytest.approx((2 / R) / (s2 + 2))
        assert bounds.upper == pytest.approx((2 / R) / s2)

    def test_initial_nu_flat(self, flat_params, flat_base):
        nu0 = initial_nu(flat_base, flat_params)
        np.testing.assert_allclose(nu0, [(2 / flat_params.R_nats) / (flat_params.sigma2 + 1.0)])

    def test_band_matrix(self):
        """Edge rows of a band matrix pull the lower bound down."""
        base = build_sc(3, 7, 0.0, 1.0)
        params = SparcParams(L=7, M=4, K=2, n=9 * 4, P=1.0, sigma2=0.5, row_blocks=9, col_blocks=7)
        bounds = nu_bounds(base, params)
        assert bounds.available
        assert bounds.lower < bounds.upper

    def test_nu0_inside_bounds(self, coupled_setup):
        base, params = coupled_setup
        bounds = nu_bounds(base, params)
        nu0 = initial_nu(base, params)
        assert np.all(nu0 >= bounds.lower) and np.all(nu0 <= bounds.upper)


class TestCouplingThresholds:
    """Test the coupling and power-allocation parameter calculator."""

    def test_vartheta(self):
        tp = coupling_thresholds(6, 32, 15.0, 1.0)
        assert tp.vartheta == pytest.approx(37 / 32)
        assert tp.capacity == pytest.approx(math.log(16))

    def test_T_pa_at_half_capacity(self):
        C = math.log(16)
        tp = coupling_thresholds(6, 32, 15.0, C / 2)
        assert tp.T_pa == math.ceil(C / math.log(2))

    def test_coupling_quantities(self):
        tp = coupling_thresholds(60, 600, 1.0, 0.5)
        gap = tp.R_star - 0.5
        assert tp.R_star == pytest.approx(math.log1p(tp.vartheta) / tp.vartheta)
        assert tp.rho_default == pytest.approx(gap / 3)
        assert tp.T_sc == math.ceil(600 * tp.omega_star / 120)
        assert tp.notes == ()

    def test_above_R_star(self):
        tp = coupling_thresholds(6, 32, 1.0, 0.69)
        assert tp.omega_star is None and tp.T_sc is None
        assert any("R*" in note for note in tp.notes)

    def test_above_capacity(self):
        tp = coupling_thresholds(6, 32, 1.0, 0.8)
        assert tp.T_pa is None
        assert tp.to_dict()["T_pa"] is None

    def test_invalid(self):
        with pytest.raises(InvalidParameterError):
            coupling_thresholds(6, 10, 1.0, 0.5)


class TestGrowthGauge:
    """Test g(K)."""

    def test_positive(self):
        assert growth_gauge(8, 0.3, 2.5) > 0

    def test_needs_large_K(self):
        with pytest.raises(InvalidParameterError):
            growth_gauge(4, 0.3, 2.5)
