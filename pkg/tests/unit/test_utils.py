import logging

import numpy as np
import pytest

from sparcmod.utils.log import configure_logging
from sparcmod.utils.numeric import exact_sum, is_power_of_two, log2_int, next_power_of_two
from sparcmod.utils.seeding import as_seed_sequence, point_seed, trial_streams


class TestNumeric:
    """Test integer helpers."""

    @pytest.mark.parametrize("x,expected", [(1, True), (2, True), (1024, True), (0, False), (6, False),
                                            (-4, False), (True, False), (4.0, False)])
    def test_is_power_of_two(self, x, expected):
        assert is_power_of_two(x) is expected

    def test_log2_int(self):
        assert log2_int(1) == 0
        assert log2_int(512) == 9
        with pytest.raises(ValueError):
            log2_int(12)

    @pytest.mark.parametrize("x,expected", [(1, 1), (5, 8), (8, 8), (9, 16)])
    def test_next_power_of_two(self, x, expected):
        assert next_power_of_two(x) == expected

    def test_exact_sum_order_independent(self):
        values = [1e16, 1.0, -1e16, 1.0]
        assert exact_sum(values) == exact_sum(reversed(values)) == 2.0


class TestSeeding:
    """Test seed derivation."""

    def test_trial_streams_distinct(self):
        streams = trial_streams(0, 1, 2)
        draws = [np.random.default_rng(s).integers(1 << 30) for s in streams]
        assert len(set(draws)) == 3

    def test_trial_streams_reproducible(self):
        a = np.random.default_rng(trial_streams(5, 0, 3).noise).standard_normal(4)
        b = np.random.default_rng(trial_streams(5, 0, 3).noise).standard_normal(4)
        np.testing.assert_array_equal(a, b)

    def test_trials_differ(self):
        a = np.random.default_rng(trial_streams(5, 0, 3).payload).random()
        b = np.random.default_rng(trial_streams(5, 0, 4).payload).random()
        assert a != b

    def test_point_seed(self):
        assert point_seed(1, 2).entropy == [1, 2]

    def test_as_seed_sequence_passthrough(self):
        seq = np.random.SeedSequence(3)
        assert as_seed_sequence(seq) is seq
        assert as_seed_sequence(3).entropy == 3


class TestConfigureLogging:
    """Test package logging setup."""

    def test_level_from_string(self):
        logger = configure_logging("debug")
        assert logger.name == "sparcmod"
        assert logger.level == logging.DEBUG

    def test_handlers_replaced(self):
        configure_logging("INFO")
        logger = configure_logging("INFO")
        ours = [h for h in logger.handlers if getattr(h, "_sparcmod", False)]
        assert len(ours) == 1

    def test_log_file(self, tmp_path):
        path = tmp_path / "run.log"
        logger = configure_logging(logging.INFO, str(path))
        logging.getLogger("sparcmod.test").info("hello")
        for handler in logger.handlers:
            handler.flush()
        assert "hello" in path.read_text()
        configure_logging("WARNING")

    def test_unknown_level(self):
        with pytest.raises(ValueError, match="Unknown log level"):
            configure_logging("LOUD")
