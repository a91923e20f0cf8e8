"""Complex AWGN channel."""

import numpy as np

from sparcmod.errors import InvalidParameterError
from sparcmod.utils.seeding import SeedLike, as_seed_sequence


def complex_noise(n: int, sigma2: float, seed: SeedLike) -> np.ndarray:
    """n i.i.d. circularly-symmetric complex Gaussians of variance sigma2.

    Real and imaginary parts are independent with variance sigma2/2 each.
    """
    if not sigma2 > 0:
        raise InvalidParameterError(f"noise variance must be positive, got {sigma2!r}")
    rng = np.random.default_rng(as_seed_sequence(seed))
    parts = rng.standard_normal((2, n))
    return np.sqrt(sigma2 / 2) * (parts[0] + 1j * parts[1])


def add_awgn(x: np.ndarray, sigma2: float, seed: SeedLike) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    return x + complex_noise(x.size, sigma2, seed).reshape(x.shape)
