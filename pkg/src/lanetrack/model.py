"""Differential-drive kinematics and polar tracking-error geometry.

All operations here are pure functions of their arguments; there is no
shared state, so everything is safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .angles import wrap_angle
from .exceptions import (
    CoincidentPoints,
    DegenerateRho,
    NonPositiveDt,
    ZeroAngularVelocity,
)

#: Below this |omega| the motion radius is treated as undefined (straight line).
OMEGA_EPS = 1e-9

#: Polar-error rates refuse distances at or below this (meters).
RHO_EPS = 1e-3

#: Default wheel radius (m); only used to derive wheel angular velocities.
DEFAULT_WHEEL_RADIUS = 0.1


def _check_finite(name: str, value: float) -> float:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class Pose:
    """Planar robot posture (x, y, phi) in the global frame.

    phi is wrapped to (-pi, pi] on construction.
    """

    x: float
    y: float
    phi: float

    def __post_init__(self):
        _check_finite("x", self.x)
        _check_finite("y", self.y)
        _check_finite("phi", self.phi)
        object.__setattr__(self, "phi", wrap_angle(self.phi))


@dataclass(frozen=True)
class Twist:
    """Body-frame velocity command: linear v (m/s) and angular omega (rad/s)."""

    v: float
    omega: float

    def __post_init__(self):
        _check_finite("v", self.v)
        _check_finite("omega", self.omega)


@dataclass(frozen=True)
class RobotParams:
    """Wheel radius r and half the spacing d between the driving wheels."""

    wheel_radius: float = DEFAULT_WHEEL_RADIUS
    half_track: float = 0.5

    def __post_init__(self):
        if self.wheel_radius <= 0:
            raise ValueError("wheel_radius must be > 0")
        if self.half_track <= 0:
            raise ValueError("half_track must be > 0")


@dataclass(frozen=True)
class WheelSpeeds:
    """Linear and angular velocities of the right and left driving wheels."""

    v_R: float
    v_L: float
    omega_R: float
    omega_L: float

    @classmethod
    def from_linear(cls, v_R: float, v_L: float, params: RobotParams) -> "WheelSpeeds":
        r = params.wheel_radius
        return cls(v_R=v_R, v_L=v_L, omega_R=v_R / r, omega_L=v_L / r)


@dataclass(frozen=True)
class TargetState:
    """Moving target: position, heading, speed, and heading rate."""

    x_t: float
    y_t: float
    phi_t: float
    v_t: float
    phi_t_dot: float

    def __post_init__(self):
        if self.v_t < 0:
            raise ValueError("v_t must be >= 0")
        object.__setattr__(self, "phi_t", wrap_angle(self.phi_t))


@dataclass(frozen=True)
class PolarError:
    """Tracking error in polar coordinates (rho, theta, alpha, beta)."""

    rho: float
    theta: float
    alpha: float
    beta: float

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("rho must be >= 0")
        object.__setattr__(self, "theta", wrap_angle(self.theta))
        object.__setattr__(self, "alpha", wrap_angle(self.alpha))
        object.__setattr__(self, "beta", wrap_angle(self.beta))


def drive_to_body(v_R: float, v_L: float, params: RobotParams) -> Twist:
    """Wheel speeds -> body twist: v = (v_R + v_L)/2, omega = (v_R - v_L)/(2d)."""
    d = params.half_track
    return Twist(v=0.5 * (v_R + v_L), omega=(v_R - v_L) / (2.0 * d))


def body_to_drive(cmd: Twist, params: RobotParams) -> tuple[float, float]:
    """Body twist -> (v_R, v_L); exact inverse of drive_to_body."""
    d = params.half_track
    return cmd.v + cmd.omega * d, cmd.v - cmd.omega * d


def motion_radius(cmd: Twist, omega_eps: float = OMEGA_EPS) -> float:
    """Instantaneous motion radius v/omega.

    Raises ZeroAngularVelocity for straight-line motion where the radius
    is undefined.
    """
    if abs(cmd.omega) <= omega_eps:
        raise ZeroAngularVelocity(
            f"|omega|={abs(cmd.omega):.3e} below {omega_eps:.0e}; radius undefined"
        )
    return cmd.v / cmd.omega


def integrate(pose: Pose, cmd: Twist, dt: float, scheme: str = "euler") -> Pose:
    """Advance the unicycle pose by one step of length dt.

    scheme="euler" is the default explicit-Euler update used by the control
    loop; scheme="arc" is the closed-form constant-twist solution, provided
    for oracle tests.
    """
    if dt <= 0:
        raise NonPositiveDt(f"dt must be > 0, got {dt}")
    if scheme == "euler":
        return Pose(
            x=pose.x + cmd.v * math.cos(pose.phi) * dt,
            y=pose.y + cmd.v * math.sin(pose.phi) * dt,
            phi=pose.phi + cmd.omega * dt,
        )
    if scheme == "arc":
        if abs(cmd.omega) <= OMEGA_EPS:
            return Pose(
                x=pose.x + cmd.v * math.cos(pose.phi) * dt,
                y=pose.y + cmd.v * math.sin(pose.phi) * dt,
                phi=pose.phi,
            )
        phi1 = pose.phi + cmd.omega * dt
        r = cmd.v / cmd.omega
        return Pose(
            x=pose.x + r * (math.sin(phi1) - math.sin(pose.phi)),
            y=pose.y - r * (math.cos(phi1) - math.cos(pose.phi)),
            phi=phi1,
        )
    raise ValueError(f"unknown integration scheme {scheme!r}")


def polar_error(pose: Pose, target: TargetState) -> PolarError:
    """Polar tracking error of the robot relative to the moving target.

    When the robot sits exactly on the target (rho = 0) the line-of-sight
    angle theta is undefined; it is taken equal to the robot heading so the
    derived angles stay finite.
    """
    dx = target.x_t - pose.x
    dy = target.y_t - pose.y
    rho = math.hypot(dx, dy)
    theta = math.atan2(dy, dx) if rho > 0.0 else pose.phi
    return PolarError(
        rho=rho,
        theta=theta,
        alpha=wrap_angle(theta - pose.phi),
        beta=wrap_angle(theta - target.phi_t),
    )


def polar_rates(
    err: PolarError,
    cmd: Twist,
    target: TargetState,
    rho_eps: float = RHO_EPS,
) -> tuple[float, float, float]:
    """Analytic time derivatives (rho_dot, alpha_dot, beta_dot).

    Undefined near rho = 0; raises DegenerateRho at or below rho_eps.
    """
    if err.rho <= rho_eps:
        raise DegenerateRho(f"rho={err.rho:.3e} <= {rho_eps:.0e}")
    sa, sb = math.sin(err.alpha), math.sin(err.beta)
    ca, cb = math.cos(err.alpha), math.cos(err.beta)
    los_rate = (cmd.v * sa - target.v_t * sb) / err.rho
    rho_dot = target.v_t * cb - cmd.v * ca
    alpha_dot = los_rate - cmd.omega
    beta_dot = los_rate - target.phi_t_dot
    return rho_dot, alpha_dot, beta_dot


Point = tuple[float, float]


def target_heading_rate(a: Point, b: Point, c: Point, dt: float) -> float:
    """Heading rate of the target from three look-ahead points.

    The chord headings A->B and B->C are differenced (wrapped, to avoid
    2*pi spikes at the atan2 branch cut) and divided by dt.
    """
    if dt <= 0:
        raise NonPositiveDt(f"dt must be > 0, got {dt}")
    abx, aby = b[0] - a[0], b[1] - a[1]
    bcx, bcy = c[0] - b[0], c[1] - b[1]
    if abx == 0.0 and aby == 0.0:
        raise CoincidentPoints("A and B coincide")
    if bcx == 0.0 and bcy == 0.0:
        raise CoincidentPoints("B and C coincide")
    phi_ab = math.atan2(aby, abx)
    phi_bc = math.atan2(bcy, bcx)
    return wrap_angle(phi_bc - phi_ab) / dt
