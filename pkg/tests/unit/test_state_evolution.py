import math

import numpy as np
import pytest

from sparcmod.errors import InvalidParameterError
from sparcmod.sparc import state_evolution
from sparcmod.sparc.base_matrix import BaseMatrix, build_flat, build_pa_exp, build_sc
from sparcmod.sparc.bounds import coupling_thresholds, initial_nu, nu_bounds
from sparcmod.sparc.params import SparcParams
from sparcmod.sparc.state_evolution import (SE_COLUMNS, MCConfig, asymptotic_se_step, initial_se_state,
                                            mc_E_tau, run_asymptotic_se, run_se, se_step)


class TestMonteCarloE:
    """Test the Monte Carlo estimate of E(tau)."""

    @pytest.mark.parametrize("tau", [0.01, 0.5, 3.0, 100.0])
    def test_bounded(self, tau):
        est = mc_E_tau(tau, 8, 4, 500, seed=0)
        assert -1.0 <= est.estimate <= 1.0
        assert est.std_error >= 0

    def test_small_tau_is_perfect(self):
        assert mc_E_tau(1e-3, 4, 2, 500, seed=1).estimate == pytest.approx(1.0, abs=1e-6)

    def test_large_tau_is_uninformative(self):
        """BPSK symbols cancel when the posterior is flat."""
        assert abs(mc_E_tau(1e4, 4, 2, 2000, seed=2).estimate) < 0.05

    def test_single_sample_stderr(self):
        assert math.isnan(mc_E_tau(0.5, 4, 2, 1, seed=0).std_error)

    def test_independent_of_workers(self):
        one = mc_E_tau(0.7, 4, 2, 100, seed=3, workers=1, max_chunk_elements=64)
        three = mc_E_tau(0.7, 4, 2, 100, seed=3, workers=3, max_chunk_elements=64)
        assert one == three

    def test_chunks_run_on_threads(self, monkeypatch):
        used = []

        class RecordingPool(state_evolution.ThreadPoolExecutor):
            def __init__(self, *args, **kwargs):
                used.append(kwargs.get("max_workers"))
                super().__init__(*args, **kwargs)

        monkeypatch.setattr(state_evolution, "ThreadPoolExecutor", RecordingPool)
        mc_E_tau(0.7, 4, 2, 100, seed=3, workers=2, max_chunk_elements=64)
        assert used == [2]

    def test_common_random_numbers(self):
        """The same seed makes E(tau) monotone in tau across calls."""
        taus = [0.1, 0.3, 1.0, 3.0]
        values = [mc_E_tau(t, 4, 4, 400, seed=9).estimate for t in taus]
        assert values == sorted(values, reverse=True)

    @pytest.mark.parametrize("tau,M,K,n", [(0.0, 4, 2, 10), (1.0, 3, 2, 10), (1.0, 4, 3, 10),
                                           (1.0, 4, 2, 0)])
    def test_invalid(self, tau, M, K, n):
        with pytest.raises(InvalidParameterError):
            mc_E_tau(tau, M, K, n, seed=0)

    def test_config_validation(self):
        with pytest.raises(InvalidParameterError):
            MCConfig(num_samples=0)
        with pytest.raises(InvalidParameterError):
            MCConfig(workers=0)


class TestFiniteSE:
    """Test the finite-M state evolution."""

    def test_initial_state(self, flat_params, flat_base):
        state = initial_se_state(flat_base, flat_params)
        np.testing.assert_allclose(state.psi, [1.0])
        np.testing.assert_allclose(state.phi, [flat_params.sigma2 + flat_params.P])
        np.testing.assert_allclose(state.nu, initial_nu(flat_base, flat_params))

    def test_psi_and_nu_ranges(self, flat_params, flat_base):
        traj = run_se(flat_base, flat_params, T_max=8, mc_config=MCConfig(num_samples=300, seed=4))
        bounds = nu_bounds(flat_base, flat_params)
        assert bounds.available
        for state in traj.states:
            assert np.all((state.psi >= 0) & (state.psi <= 2))
            assert np.all(state.nu >= bounds.lower * (1 - 1e-12))
            assert np.all(state.nu <= bounds.upper * (1 + 1e-12))

    def test_progress_at_low_rate(self, flat_params, flat_base):
        traj = run_se(flat_base, flat_params, T_max=5, mc_config=MCConfig(num_samples=300, seed=4))
        assert traj.psi[-1].mean() < traj.psi[0].mean()
        assert traj.psi.shape == (len(traj), 1)

    def test_rate_factor_correspondence(self, flat_params, flat_base):
        """rate_factor 1 at rate R/2 is the complex recursion at rate R."""
        mc = MCConfig(num_samples=200, seed=5)
        complex_traj = run_se(flat_base, flat_params, T_max=4, mc_config=mc)
        real_traj = run_se(flat_base, flat_params, T_max=4, mc_config=mc, rate_factor=1.0,
                           rate_nats=flat_params.R_nats / 2)
        np.testing.assert_allclose(real_traj.psi, complex_traj.psi)
        np.testing.assert_allclose(real_traj.nu, complex_traj.nu)

    def test_coupled_blocks(self, coupled_setup):
        base, params = coupled_setup
        state = se_step(initial_se_state(base, params), base, params, MCConfig(num_samples=100))
        assert state.t == 1
        assert state.psi.shape == (2,)
        # (1, 2, 0) is two uncoupled copies
        assert state.psi[0] == pytest.approx(state.psi[1])

    def test_frame(self):
        base = BaseMatrix.from_rows([[1.0, 3.0]], P=2.0)
        params = SparcParams(L=8, M=4, K=2, n=32, P=2.0, sigma2=0.5, col_blocks=2)
        trajectory = run_se(base, params, T_max=2, mc_config=MCConfig(num_samples=50))
        frame = trajectory.to_frame()
        assert list(frame.columns) == SE_COLUMNS
        assert SE_COLUMNS[-1] == "psi_std_err"
        last = frame[frame["t"] == trajectory.states[-1].t]
        np.testing.assert_allclose(last["psi_std_err"], trajectory.states[-1].psi_stderr)
        assert frame["t"].tolist()[:2] == [0, 0]
        second = frame[(frame["t"] == 0) & (frame["block"] == 1)].iloc[0]
        assert math.isnan(second["gamma"])
        assert second["psi"] == 1.0

    def test_invalid_T(self, flat_params, flat_base):
        with pytest.raises(InvalidParameterError):
            run_se(flat_base, flat_params, T_max=0)


class TestAsymptoticSE:
    """Test the large-M threshold recursion."""

    def test_flat_below_threshold(self):
        traj = run_asymptotic_se(build_flat(1.0), sigma2=1.0, rate_nats=0.4, T_max=10)
        assert len(traj) == 2
        assert not traj[-1].any()

    def test_flat_above_threshold(self):
        traj = run_asymptotic_se(build_flat(1.0), sigma2=1.0, rate_nats=0.6, T_max=10)
        assert len(traj) == 2
        assert traj[-1].tolist() == [1.0]

    def test_power_allocation_within_bound(self):
        """Exponential allocation at 0.8 C decodes within ceil(C / ln(C/R)) steps."""
        P, sigma2 = 15.0, 1.0
        C = math.log1p(P / sigma2)
        R = 0.8 * C
        T = math.ceil(C / math.log(C / R))
        assert T == 13
        traj = run_asymptotic_se(build_pa_exp(1024, P, C), sigma2, R, T_max=T)
        assert not traj[-1].any()
        assert len(traj) - 1 <= T

    def test_power_allocation_above_capacity(self):
        P, sigma2 = 15.0, 1.0
        C = math.log1p(P / sigma2)
        traj = run_asymptotic_se(build_pa_exp(256, P, C), sigma2, 1.1 * C, T_max=50)
        assert traj[-1].all()

    def test_spatial_coupling_within_bound(self):
        snr, R, omega, Lambda = 1.0, 0.5, 60, 600
        tp = coupling_thresholds(omega, Lambda, snr, R)
        assert omega > tp.omega_star
        base = build_sc(omega, Lambda, tp.rho_default, snr)
        traj = run_asymptotic_se(base, sigma2=1.0, rate_nats=R, T_max=tp.T_sc)
        assert not traj[-1].any()

    def test_coupling_beats_flat(self):
        """Above the uncoupled threshold, the coupled wave still decodes the band edges."""
        base = build_sc(60, 600, 0.0, 1.0)
        first = asymptotic_se_step(np.ones(600), base, sigma2=1.0, rate_nats=0.5)
        assert first[0] == 0.0 and first[-1] == 0.0
        assert first[300] == 1.0

    def test_shape_check(self):
        with pytest.raises(InvalidParameterError, match="shape"):
            asymptotic_se_step(np.ones(3), build_flat(1.0), 1.0, 0.5)
