import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrqaoa.errors import ParameterError
from lrqaoa.schedule import (
    DEFAULT_DELTA_BETA,
    DEFAULT_DELTA_GAMMA,
    SCAN_MAX,
    LinearRampSchedule,
    build_schedule,
    delta_grid,
)


def test_small_schedules():
    s = build_schedule(0.3, 0.6, 1)
    assert list(s.betas) == [0.3] and list(s.gammas) == [0.6]
    s = build_schedule(0.3, 0.6, 2)
    np.testing.assert_allclose(s.betas, [0.3, 0.15])
    np.testing.assert_allclose(s.gammas, [0.3, 0.6])


def test_defaults():
    assert (DEFAULT_DELTA_BETA, DEFAULT_DELTA_GAMMA) == (0.3, 0.6)


def test_invalid():
    with pytest.raises(ParameterError):
        build_schedule(0.3, 0.6, 0)
    with pytest.raises(ParameterError):
        build_schedule(-0.1, 0.6, 3)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 3), st.floats(0.01, 3), st.integers(1, 10_000))
def test_endpoints_and_monotonicity(db, dg, p):
    s = build_schedule(db, dg, p)
    assert s.p == p and len(s.betas) == p and len(s.gammas) == p
    assert s.betas[0] == db
    assert s.betas[-1] == pytest.approx(db / p, rel=1e-12)
    assert s.gammas[-1] == pytest.approx(dg, rel=1e-12)
    if p > 1:
        assert np.all(np.diff(s.betas) < 0)
        assert np.all(np.diff(s.gammas) > 0)


def test_serialization():
    s = build_schedule(0.4, 0.7, 5)
    d = s.to_dict()
    assert d == {"delta_beta": 0.4, "delta_gamma": 0.7, "p": 5}
    assert LinearRampSchedule.from_dict(d).to_dict() == d


def test_grid():
    g = delta_grid((0, SCAN_MAX), (0, SCAN_MAX), 4)
    assert len(g) == 16
    axis = sorted({b for b, _ in g})
    np.testing.assert_allclose(axis, [0, math.pi / 4, math.pi / 2, 3 * math.pi / 4])
    g67 = delta_grid((0.1, 1.1), (0.1, 1.3), (6, 7))
    assert len(g67) == 42 and g67[0] == (0.1, 0.1) and g67[1][0] == 0.1
    with pytest.raises(ParameterError):
        delta_grid((0, 1), (0, 1), 1)
