import math

import pytest
from hypothesis import given, strategies as st

from lanetrack.angles import angle_diff, wrap_angle


def test_wrap_identity_inside_interval():
    for a in (-3.0, -1.5, 0.0, 0.25, 3.0):
        assert wrap_angle(a) == pytest.approx(a, abs=1e-15)


def test_wrap_endpoints():
    # (-pi, pi]: both endpoints map onto +pi
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)


def test_wrap_known_values():
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert wrap_angle(-3 * math.pi / 2) == pytest.approx(math.pi / 2)
    assert wrap_angle(2 * math.pi) == pytest.approx(0.0, abs=1e-12)
    assert wrap_angle(7 * math.pi) == pytest.approx(math.pi)


@given(st.floats(-1e6, 1e6))
def test_wrap_range_and_equivalence(a):
    w = wrap_angle(a)
    assert -math.pi < w <= math.pi
    # same direction on the unit circle
    assert math.cos(w) == pytest.approx(math.cos(a), abs=1e-6)
    assert math.sin(w) == pytest.approx(math.sin(a), abs=1e-6)


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_angle_diff_antisymmetric_mod_2pi(a, b):
    d1 = angle_diff(a, b)
    d2 = angle_diff(b, a)
    assert math.isclose(math.sin(d1), -math.sin(d2), abs_tol=1e-9)


def test_angle_diff_crosses_branch_cut():
    assert angle_diff(3.1, -3.1) == pytest.approx(3.1 - (-3.1) - 2 * math.pi)
