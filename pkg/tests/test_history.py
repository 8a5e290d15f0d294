import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pebodrem.errors import DimensionError, OrderingError, OutOfRangeError
from pebodrem.history import DelayFunction, SignalHistory, delayed_time


def test_append_grows_and_rejects_bad_samples():
    h = SignalHistory(capacity=1)
    h.append(0.0, np.array([1.0, 2.0]))
    assert len(h) == 1
    h.append(0.001, np.array([3.0, 4.0]))
    assert len(h) == 2
    with pytest.raises(OrderingError):
        h.append(0.001, np.array([0.0, 0.0]))
    with pytest.raises(DimensionError):
        h.append(0.002, np.zeros(3))


def test_duplicate_time_rejected():
    h = SignalHistory()
    h.append(0.0, [1.0])
    with pytest.raises(OrderingError):
        h.append(0.0, [2.0])


def test_sample_interpolates_and_hits_grid_exactly():
    h = SignalHistory()
    h.append(0.0, [0.0])
    h.append(1.0, [2.0])
    assert h.sample(0.5)[0] == 1.0
    assert h.sample(1.0)[0] == 2.0
    with pytest.raises(OutOfRangeError, match="-0.1"):
        h.sample(-0.1)
    with pytest.raises(OutOfRangeError):
        h.sample(1.5)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=40), st.floats(0, 1))
def test_grid_points_returned_bit_for_bit(vals, frac):
    h = SignalHistory(capacity=4)
    times = [0.0]
    for i in range(1, len(vals)):
        times.append(times[-1] + 0.001 * (1 + (i % 3)))
    for t, v in zip(times, vals):
        h.append(t, np.array([v, -v]))
    for t, v in zip(times, vals):
        assert h.sample(t)[0] == v
    # between samples the value lies on the chord
    i = len(vals) // 2 - 1
    tq = times[i] + frac * (times[i + 1] - times[i])
    lo, hi = sorted((vals[i], vals[i + 1]))
    assert lo - 1e-9 * (1 + abs(lo)) <= h.sample(tq)[0] <= hi + 1e-9 * (1 + abs(hi))


def test_discard_before_keeps_window():
    h = SignalHistory(capacity=8)
    for i in range(100):
        h.append(i * 0.1, [float(i)])
    h.discard_before(5.05)
    assert h.first_time == pytest.approx(5.0)
    assert h.sample(5.05)[0] == pytest.approx(50.5)
    with pytest.raises(OutOfRangeError):
        h.sample(4.9)
    for i in range(100, 300):
        h.append(i * 0.1, [float(i)])
    assert h.sample(29.9)[0] == pytest.approx(299.0)


def test_delayed_time_examples():
    one = DelayFunction(lambda t: 1.0, 1.0)
    assert delayed_time(5.0, one) == 4.0
    assert delayed_time(0.5, one, t0=0.0) == 0.0
    c2 = DelayFunction(lambda t: 1.0 + 0.25 * math.sin(t), 1.25)
    assert delayed_time(2.0, c2) == pytest.approx(2.0 - 1.2273243567064205, abs=1e-15)


@given(st.floats(0, 100), st.floats(0, 5))
def test_delayed_time_in_window(t, d):
    phi = delayed_time(t, lambda s: d)
    assert 0.0 <= phi <= t
    assert delayed_time(t, lambda s: 0.0) == t
