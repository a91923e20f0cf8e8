from sparcmod.utils.log import configure_logging
from sparcmod.utils.numeric import exact_sum, is_power_of_two, log2_int, next_power_of_two
from sparcmod.utils.seeding import as_seed_sequence, point_seed, trial_streams

__all__ = [
    "configure_logging",
    "exact_sum",
    "is_power_of_two",
    "log2_int",
    "next_power_of_two",
    "as_seed_sequence",
    "point_seed",
    "trial_streams",
]
