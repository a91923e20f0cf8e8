"""
Block-structured design operators.

Block ``(r, c)`` of the design matrix spans rows ``r*n/R .. (r+1)*n/R`` and
columns ``c*LM/C .. (c+1)*LM/C``; its entries have variance ``W_rc / L``.
Blocks where ``W_rc = 0`` are identically zero and are never touched.

Two realisations are provided. :class:`GaussianOperator` stores the matrix
explicitly and is meant for small codes and for cross-checks.
:class:`DftOperator` never forms the matrix: each nonzero block is a random
row subset of a unitary DFT, applied to a randomly phased and scattered copy
of the input, so a matrix-vector product costs one FFT per nonzero block.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import scipy.fft
import scipy.linalg

from sparcmod.errors import DimensionMismatchError, InvalidParameterError, SizeGuardError
from sparcmod.sparc.base_matrix import BaseMatrix
from sparcmod.sparc.params import SparcParams, block_maps
from sparcmod.utils.numeric import is_power_of_two, next_power_of_two
from sparcmod.utils.seeding import SeedLike, as_seed_sequence

logger = logging.getLogger(__name__)

DEFAULT_MAX_ENTRIES = 2 ** 26


class OperatorKind(str, Enum):
    GAUSSIAN = "gaussian"
    DFT = "dft"


@dataclass(frozen=True, eq=False)
class WeightMatrixBlocks:
    """Block-constant weights for the weighted adjoint and the Onsager term.

    ``q[r, c]`` multiplies block ``(r, c)`` of the adjoint; ``onsager[r]``
    multiplies row block ``r`` of the previous residual.
    """

    q: np.ndarray
    onsager: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float, ndmin=2)
        onsager = np.array(self.onsager, dtype=float, ndmin=1)
        for name, arr in (("q", q), ("onsager", onsager)):
            if not np.all(np.isfinite(arr)):
                raise InvalidParameterError(f"weight block {name} has non-finite entries")
            if np.any(arr < 0):
                raise InvalidParameterError(f"weight block {name} has negative entries")
        if onsager.shape != (q.shape[0],):
            raise DimensionMismatchError(
                f"onsager has shape {onsager.shape}, expected ({q.shape[0]},)")
        q.setflags(write=False)
        onsager.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "onsager", onsager)

    @classmethod
    def ones(cls, row_blocks: int, col_blocks: int) -> "WeightMatrixBlocks":
        return cls(np.ones((row_blocks, col_blocks)), np.zeros(row_blocks))

    @classmethod
    def from_estimates(cls, tau: np.ndarray, phi: np.ndarray, gamma: np.ndarray,
                       phi_prev: Optional[np.ndarray]) -> "WeightMatrixBlocks":
        """Weights ``2 tau_c / phi_r`` and Onsager scalars ``gamma_r / phi_prev_r``.

        ``tau`` is the per-real-dimension effective noise variance, so the
        factor 2 makes ``beta + (Q * A)^* z`` an unbiased observation of beta.
        ``phi_prev=None`` is the first iteration, where the Onsager term is 0.
        """
        tau = np.asarray(tau, dtype=float)
        phi = np.asarray(phi, dtype=float)
        q = 2.0 * tau[None, :] / phi[:, None]
        if phi_prev is None:
            onsager = np.zeros_like(phi)
        else:
            onsager = np.asarray(gamma, dtype=float) / np.asarray(phi_prev, dtype=float)
        return cls(q, onsager)


class DesignOperator(ABC):
    """A linear map C^LM -> C^n with block variance profile W/L."""

    kind: OperatorKind

    def __init__(self, base: BaseMatrix, params: SparcParams, seed: SeedLike):
        if base.shape != (params.row_blocks, params.col_blocks):
            raise DimensionMismatchError(
                f"base matrix shape {base.shape} does not match the code's "
                f"({params.row_blocks}, {params.col_blocks}) block structure")
        self.base = base
        self.params = params
        self.seed = as_seed_sequence(seed)

    @property
    def shape(self):
        return (self.params.n, self.params.LM)

    def apply(self, beta: np.ndarray) -> np.ndarray:
        beta = np.asarray(beta, dtype=complex).ravel()
        if beta.size != self.params.LM:
            raise DimensionMismatchError(f"input has length {beta.size}, operator expects {self.params.LM}")
        return self._apply(beta)

    def adjoint(self, z: np.ndarray) -> np.ndarray:
        return self.apply_weighted_adjoint(
            z, WeightMatrixBlocks.ones(self.params.row_blocks, self.params.col_blocks))

    def apply_weighted_adjoint(self, z: np.ndarray, weights: WeightMatrixBlocks) -> np.ndarray:
        """``(Q * A)^* z`` with Q constant over each block."""
        z = np.asarray(z, dtype=complex).ravel()
        if z.size != self.params.n:
            raise DimensionMismatchError(f"input has length {z.size}, operator expects {self.params.n}")
        if weights.q.shape != self.base.shape:
            raise DimensionMismatchError(
                f"weights have shape {weights.q.shape}, base matrix is {self.base.shape}")
        return self._weighted_adjoint(z, weights.q)

    def describe(self) -> dict:
        return {
            "kind": self.kind.value,
            "seed_entropy": str(self.seed.entropy),
            "seed_spawn_key": list(self.seed.spawn_key),
        }

    @abstractmethod
    def _apply(self, beta: np.ndarray) -> np.ndarray:
        """Validated forward product."""

    @abstractmethod
    def _weighted_adjoint(self, z: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Validated weighted adjoint product."""

    @abstractmethod
    def to_dense(self) -> np.ndarray:
        """The n x LM matrix this operator represents."""


class GaussianOperator(DesignOperator):
    """Explicit matrix with independent CN(0, W_rc / L) entries."""

    kind = OperatorKind.GAUSSIAN

    def __init__(self, base: BaseMatrix, params: SparcParams, seed: SeedLike,
                 max_entries: int = DEFAULT_MAX_ENTRIES):
        super().__init__(base, params, seed)
        entries = params.n * params.LM
        if entries > max_entries:
            raise SizeGuardError(
                f"explicit Gaussian matrix needs {entries} entries, cap is {max_entries}")
        rng = np.random.default_rng(self.seed)
        maps = block_maps(params)
        std = np.sqrt(base.entries[maps.row][:, maps.col] / (2 * params.L))
        matrix = rng.standard_normal((params.n, params.LM)) + 1j * rng.standard_normal((params.n, params.LM))
        matrix *= std
        matrix.setflags(write=False)
        self.matrix = matrix

    def _apply(self, beta):
        return self.matrix @ beta

    def _weighted_adjoint(self, z, q):
        p = self.params
        out = np.zeros((p.col_blocks, p.cols_per_block), dtype=complex)
        for r in range(p.row_blocks):
            rows = slice(r * p.rows_per_block, (r + 1) * p.rows_per_block)
            part = (self.matrix[rows].conj().T @ z[rows]).reshape(p.col_blocks, -1)
            out += q[r][:, None] * part
        return out.ravel()

    def to_dense(self):
        return np.array(self.matrix)


class DftOperator(DesignOperator):
    """Implicit operator built from randomised sub-sampled unitary DFTs.

    For nonzero block ``b = (r, c)``, with transform size ``N``:

        A_b = sqrt(W_rc N / L) * S_b F P_b D_b

    where ``D_b`` is a diagonal of independent uniform phases, ``P_b`` scatters
    the ``LM/C`` block inputs to distinct random transform positions, ``F`` is
    the unitary DFT and ``S_b`` keeps ``n/R`` random rows other than row 0.
    Every entry has modulus ``sqrt(W_rc / L)``.
    """

    kind = OperatorKind.DFT

    def __init__(self, base: BaseMatrix, params: SparcParams, seed: SeedLike):
        super().__init__(base, params, seed)
        Mr, Mc = params.rows_per_block, params.cols_per_block
        if not is_power_of_two(Mc):
            raise InvalidParameterError(f"DFT operator needs LM/C={Mc} to be a power of two")
        N = max(Mc, next_power_of_two(Mr + 1))

        pairs = base.nonzero_blocks
        rng = np.random.default_rng(self.seed)
        n_blocks = len(pairs)
        rows = np.empty((n_blocks, Mr), dtype=np.int64)
        cols = np.empty((n_blocks, Mc), dtype=np.int64)
        phases = np.empty((n_blocks, Mc), dtype=complex)
        for b in range(n_blocks):
            rows[b] = rng.choice(np.arange(1, N), size=Mr, replace=False)
            cols[b] = rng.permutation(N)[:Mc]
            phases[b] = np.exp(2j * np.pi * rng.random(Mc))

        self.transform_size = N
        self.row_idx = pairs[:, 0].copy()
        self.col_idx = pairs[:, 1].copy()
        self.rows = rows
        self.cols = cols
        self.phases = phases
        self.scale = np.sqrt(base.entries[self.row_idx, self.col_idx] * N / params.L)
        for arr in (self.row_idx, self.col_idx, self.rows, self.cols, self.phases, self.scale):
            arr.setflags(write=False)
        logger.debug("DFT operator: %d nonzero blocks, transform size %d", n_blocks, N)

    def _apply(self, beta):
        p = self.params
        n_blocks = self.row_idx.size
        picks = np.arange(n_blocks)[:, None]
        ext = np.zeros((n_blocks, self.transform_size), dtype=complex)
        ext[picks, self.cols] = self.phases * beta.reshape(p.col_blocks, -1)[self.col_idx]
        spectrum = scipy.fft.fft(ext, axis=1, norm="ortho")
        parts = spectrum[picks, self.rows] * self.scale[:, None]
        out = np.zeros((p.row_blocks, p.rows_per_block), dtype=complex)
        np.add.at(out, self.row_idx, parts)
        return out.ravel()

    def _weighted_adjoint(self, z, q):
        p = self.params
        n_blocks = self.row_idx.size
        picks = np.arange(n_blocks)[:, None]
        gain = self.scale * q[self.row_idx, self.col_idx]
        ext = np.zeros((n_blocks, self.transform_size), dtype=complex)
        ext[picks, self.rows] = z.reshape(p.row_blocks, -1)[self.row_idx] * gain[:, None]
        signal = scipy.fft.ifft(ext, axis=1, norm="ortho")
        parts = signal[picks, self.cols] * self.phases.conj()
        out = np.zeros((p.col_blocks, p.cols_per_block), dtype=complex)
        np.add.at(out, self.col_idx, parts)
        return out.ravel()

    def to_dense(self):
        p = self.params
        F = scipy.linalg.dft(self.transform_size, scale="sqrtn")
        dense = np.zeros(self.shape, dtype=complex)
        for b, (r, c) in enumerate(zip(self.row_idx, self.col_idx)):
            block = self.scale[b] * F[self.rows[b]][:, self.cols[b]] * self.phases[b][None, :]
            dense[r * p.rows_per_block:(r + 1) * p.rows_per_block,
                  c * p.cols_per_block:(c + 1) * p.cols_per_block] = block
        return dense

    def describe(self):
        info = super().describe()
        info.update(transform_size=self.transform_size, nonzero_blocks=int(self.row_idx.size))
        return info


def sample_gaussian(base: BaseMatrix, params: SparcParams, seed: SeedLike,
                    max_entries: int = DEFAULT_MAX_ENTRIES) -> GaussianOperator:
    return GaussianOperator(base, params, seed, max_entries=max_entries)


def build_dft_operator(base: BaseMatrix, params: SparcParams, seed: SeedLike) -> DftOperator:
    return DftOperator(base, params, seed)


def build_operator(kind, base: BaseMatrix, params: SparcParams, seed: SeedLike,
                   max_entries: int = DEFAULT_MAX_ENTRIES) -> DesignOperator:
    kind = OperatorKind(kind)
    if kind is OperatorKind.GAUSSIAN:
        return sample_gaussian(base, params, seed, max_entries=max_entries)
    return build_dft_operator(base, params, seed)
