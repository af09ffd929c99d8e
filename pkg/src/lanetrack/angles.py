"""Angle helpers shared by the kinematics and controller code."""

import math


def wrap_angle(a: float) -> float:
    """Wrap an angle to the interval (-pi, pi].

    The upper endpoint is inclusive so that wrap_angle(pi) == pi and
    wrap_angle(-pi) == pi, keeping the convention consistent with atan2
    except on the branch cut.
    """
    return math.pi - (math.pi - a) % (2.0 * math.pi)


def angle_diff(a: float, b: float) -> float:
    """Smallest signed difference a - b, wrapped to (-pi, pi]."""
    return wrap_angle(a - b)
