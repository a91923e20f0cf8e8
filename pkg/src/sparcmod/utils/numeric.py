"""Small integer and summation helpers."""

import math
import numbers
from typing import Iterable


def is_power_of_two(x) -> bool:
    if isinstance(x, bool) or not isinstance(x, numbers.Integral):
        return False
    x = int(x)
    return x > 0 and (x & (x - 1)) == 0


def log2_int(x) -> int:
    """Exact base-2 logarithm of a power of two."""
    if not is_power_of_two(x):
        raise ValueError(f"{x} is not a power of two")
    return int(x).bit_length() - 1


def next_power_of_two(x: int) -> int:
    """Smallest power of two that is >= x (x >= 1)."""
    if x < 1:
        raise ValueError(f"{x} must be positive")
    return 1 << (int(x) - 1).bit_length()


def exact_sum(values: Iterable[float]) -> float:
    # Correctly rounded, so the result does not depend on summation order.
    return math.fsum(values)
