import logging
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardnesslab.core.config import Settings, settings
from hardnesslab.core.errors import (
    BudgetError,
    CouplingError,
    FormatError,
    HypothesisError,
    InvariantError,
    NicenessError,
    ParameterError,
)
from hardnesslab.core.logging import ROOT_LOGGER, configure_logging
from hardnesslab.core.parallel import chunk_bounds, map_chunks
from hardnesslab.core.rng import child_seed, point_rng, stream_id
from hardnesslab.core.stats import (
    chebyshev_bound,
    hoeffding_bound,
    loglog_slope,
    mean_ci,
    two_proportion_z,
    variance_ci,
    wilson,
)


def _squares(start, stop):
    return [i * i for i in range(start, stop)]


def test_point_rng_is_a_function_of_seed_index_and_stream():
    a = point_rng(7, 123, stream_id("x")).random(5)
    b = point_rng(7, 123, stream_id("x")).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, point_rng(7, 124, stream_id("x")).random(5))
    assert not np.array_equal(a, point_rng(7, 123, stream_id("y")).random(5))


def test_point_rng_rejects_negative_seed():
    with pytest.raises(ValueError):
        point_rng(-1, 0)


def test_child_seed_is_non_negative():
    assert child_seed(point_rng(0, 0)) >= 0


@given(st.integers(0, 500), st.integers(1, 64))
def test_chunk_bounds_tile_the_range(total, size):
    bounds = chunk_bounds(total, size)
    covered = [i for start, stop in bounds for i in range(start, stop)]
    assert covered == list(range(total))


def test_map_chunks_output_does_not_depend_on_worker_count():
    serial = map_chunks(_squares, 50, workers=1, chunk_size=7)
    parallel = map_chunks(_squares, 50, workers=2, chunk_size=7)
    assert serial == parallel == [i * i for i in range(50)]


def test_wilson_interval_contains_the_estimate():
    p = wilson(30, 100)
    assert p.low <= p.estimate <= p.high
    assert wilson(0, 10).low == 0.0
    assert wilson(0, 0).ci95 == (0.0, 1.0)


def test_mean_and_variance_intervals():
    values = [1.0, 2.0, 3.0, 4.0]
    mean, low, high = mean_ci(values)
    assert mean == 2.5 and low < mean < high
    var, vlow, vhigh = variance_ci(values)
    assert var == pytest.approx(5.0 / 3.0)
    assert 0.0 <= vlow <= var <= vhigh


@given(st.floats(-2.0, 2.0), st.floats(0.1, 10.0))
def test_loglog_slope_recovers_a_power_law(exponent, constant):
    xs = [2.0, 4.0, 8.0, 16.0]
    ys = [constant * x**exponent for x in xs]
    slope, fitted = loglog_slope(xs, ys)
    assert slope == pytest.approx(exponent, abs=1e-9)
    assert fitted == pytest.approx(constant, rel=1e-9)


def test_tail_bounds_are_probabilities():
    assert hoeffding_bound(0, 0.1) == 1.0
    assert 0.0 < hoeffding_bound(1000, 0.1) < 1.0
    assert chebyshev_bound(1.0, 0.0) == 1.0
    assert chebyshev_bound(1.0, 10.0) == pytest.approx(0.01)


def test_two_proportion_z_is_zero_for_equal_constant_samples():
    assert two_proportion_z(0.0, 10, 0.0, 10) == 0.0
    assert math.isinf(two_proportion_z(0.0, 10, 1.0, 10))


def test_exit_codes_follow_the_error_family():
    assert ParameterError("x").exit_code == 2
    assert BudgetError("x").exit_code == 2
    assert FormatError("x").exit_code == 2
    assert HypothesisError("x").exit_code == 1
    assert NicenessError("x").exit_code == 1
    assert CouplingError("x").exit_code == 1
    assert InvariantError("x").exit_code == 1


def test_error_message_carries_the_witness():
    assert str(NicenessError("not nice", witness=(1, 2, 3, 0))) == "not nice (witness: (1, 2, 3, 0))"


def test_configure_logging_replaces_handlers(tmp_path):
    configure_logging("DEBUG")
    logger = configure_logging("warning", log_file=tmp_path / "logs" / "lab.log")
    assert logger.name == ROOT_LOGGER
    assert logger.level == logging.WARNING
    assert len(logger.handlers) == 2
    logger = configure_logging("nonsense", console=False)
    assert logger.level == logging.INFO
    assert logger.handlers == []


def test_settings_read_the_lab_prefix(monkeypatch):
    monkeypatch.setenv("LAB_WORKERS", "3")
    monkeypatch.setenv("LAB_LOG_LEVEL", "DEBUG")
    fresh = Settings()
    assert fresh.WORKERS == 3
    assert fresh.LOG_LEVEL == "DEBUG"
    assert settings.CHUNK_SIZE == 4096
