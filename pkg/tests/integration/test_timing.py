"""
Wall-clock scaling of one AMP iteration. Opt in with ``pytest -m timing`` on an
otherwise idle machine.
"""

import statistics
import time

import numpy as np
import pytest

from sparcmod.sparc.amp import DecoderState, amp_step
from sparcmod.sparc.base_matrix import build_flat
from sparcmod.sparc.channel import add_awgn
from sparcmod.sparc.design import build_dft_operator
from sparcmod.sparc.encoder import MessageVector, encode
from sparcmod.sparc.params import SparcParams


@pytest.mark.timing
class TestIterationCost:
    """One DFT-based AMP iteration costs O(LM (log LM + K))."""

    def _seconds_per_iteration(self, LM: int, M: int = 256, K: int = 4, repeats: int = 7) -> float:
        L = LM // M
        params = SparcParams(L=L, M=M, K=K, n=4 * L, P=1.0, sigma2=0.5)
        base = build_flat(1.0)
        A = build_dft_operator(base, params, seed=0)
        y = add_awgn(encode(A, MessageVector.random(L, M, K, seed=1)), params.sigma2, seed=2)
        state = amp_step(DecoderState.initial(params), y, A, base, params)
        amp_step(state, y, A, base, params)
        times = []
        for _ in range(repeats):
            started = time.perf_counter()
            amp_step(state, y, A, base, params)
            times.append(time.perf_counter() - started)
        return statistics.median(times)

    def test_scaling(self):
        K = 4
        sizes = np.array([2 ** 14, 2 ** 16, 2 ** 18, 2 ** 20], dtype=float)
        seconds = np.array([self._seconds_per_iteration(int(LM), K=K) for LM in sizes])
        model = sizes * (np.log(sizes) + K)
        c = float(model @ seconds / (model @ model))
        residual = np.abs(seconds - c * model) / (c * model)
        assert residual.max() <= 0.25, residual
