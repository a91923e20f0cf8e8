"""Deterministic seed derivation for trials and Monte Carlo chunks.

Every random draw in a run descends from one master seed. A trial at sweep
point ``p`` and index ``t`` uses ``SeedSequence([master, p, t])`` and spawns
independent payload, operator and noise streams from it, so results do not
depend on which worker runs the trial or in which order.
"""

from typing import NamedTuple, Sequence, Union

import numpy as np

SeedLike = Union[int, Sequence[int], np.random.SeedSequence]


class TrialStreams(NamedTuple):
    payload: np.random.SeedSequence
    operator: np.random.SeedSequence
    noise: np.random.SeedSequence


def as_seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def point_seed(master_seed: int, point_index: int) -> np.random.SeedSequence:
    """Seed shared by all trials of one sweep point (fixed-operator mode)."""
    return np.random.SeedSequence([master_seed, point_index])


def trial_streams(master_seed: int, point_index: int, trial_index: int) -> TrialStreams:
    payload, operator, noise = np.random.SeedSequence(
        [master_seed, point_index, trial_index]).spawn(3)
    return TrialStreams(payload, operator, noise)
