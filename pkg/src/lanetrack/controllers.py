"""Tracking control laws and command saturation.

Contains the proposed Lyapunov controller (linear and angular laws), the
naive linear law it replaced (kept as a diagnostic), a conventional
Lyapunov controller used for comparison, Lyapunov value/rate diagnostics,
and magnitude + slew saturation of commands.

All functions are pure; the slew limiter's dependence on the previous
command is explicit in its signature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import DegenerateRho, NearSingularAlpha
from .model import PolarError, TargetState, Twist, polar_rates

#: |cos(alpha)| guard for the naive linear law.
COS_EPS = 1e-3

#: Magnitude clamp for singular sin(alpha)/alpha denominators.
SIN_EPS = 1e-6

#: polar rates / angular laws refuse rho at or below this (meters).
RHO_EPS = 1e-3

#: |alpha| below which sin(2a)/(2a) is evaluated by series.
SERIES_EPS = 1e-4


@dataclass(frozen=True)
class ControllerGains:
    """Gains of the tracking laws; defaults follow the tuned field values."""

    lambda_v: float = 0.075
    lambda_a: float = 0.15
    k1: float = 0.8
    k2: float = 50.0

    def __post_init__(self):
        for name in ("lambda_v", "lambda_a", "k1", "k2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class SaturationLimits:
    """Magnitude and slew bounds applied to every command."""

    v_min: float = 0.6
    v_max: float = 1.75
    omega_abs_max: float = 0.4
    accel_max: float = 1.0
    alpha_accel_max: float = 1.0

    def __post_init__(self):
        if self.v_min > self.v_max:
            raise ValueError("v_min must be <= v_max")
        if self.omega_abs_max <= 0:
            raise ValueError("omega_abs_max must be > 0")
        if self.accel_max <= 0 or self.alpha_accel_max <= 0:
            raise ValueError("acceleration limits must be > 0")

    @classmethod
    def for_target_speed(cls, v_t: float) -> "SaturationLimits":
        """Speed bounds for a given target speed: v in [0.6, v_t + 0.25].

        Matches both published profiles (v_max 1.75 at v_t=1.5, 2.25 at 2.0).
        """
        return cls(v_min=0.6, v_max=v_t + 0.25)


@dataclass
class CommandFlags:
    """Diagnostic counters set by the guarded angular laws."""

    singular_alpha: bool = False

    def merge(self, other: "CommandFlags") -> None:
        self.singular_alpha = self.singular_alpha or other.singular_alpha


@dataclass(frozen=True)
class LyapunovReport:
    variant: str
    V1: float
    V2: float
    V1_dot: float
    V2_dot: float

    @property
    def V(self) -> float:
        return self.V1 + self.V2


def proposed_linear(err: PolarError, target: TargetState, gains: ControllerGains) -> float:
    """Linear law v = (v_t cos(beta) + lambda_v rho) cos(alpha)."""
    return (target.v_t * math.cos(err.beta) + gains.lambda_v * err.rho) * math.cos(err.alpha)


def naive_linear(
    err: PolarError,
    target: TargetState,
    gains: ControllerGains,
    cos_eps: float = COS_EPS,
) -> float:
    """First-pass linear law v = v_t cos(beta)/cos(alpha) + lambda_v rho cos(alpha).

    Diverges as |alpha| -> pi/2, which is why it was replaced; kept only as
    a diagnostic variant. Raises NearSingularAlpha near the singularity.
    """
    ca = math.cos(err.alpha)
    if abs(ca) <= cos_eps:
        raise NearSingularAlpha(f"|cos(alpha)|={abs(ca):.3e} <= {cos_eps:.0e}")
    return target.v_t * math.cos(err.beta) / ca + gains.lambda_v * err.rho * ca


def _clamped(x: float, eps: float) -> float:
    """Clamp |x| from below to eps, preserving sign (sign(0) treated as +)."""
    if abs(x) >= eps:
        return x
    return eps if x >= 0.0 else -eps


def proposed_angular(
    err: PolarError,
    target: TargetState,
    gains: ControllerGains,
    rho_eps: float = RHO_EPS,
    sin_eps: float = SIN_EPS,
    flags: CommandFlags | None = None,
) -> float:
    """Angular law of the proposed controller.

    Built so that along the closed loop the angular Lyapunov term decays as
    dV2/dt = -lambda_a sin^2(alpha)/k1 exactly. Using sin(2a)/(2 sin a) =
    cos a, the law reads

        omega = lambda_a sin(a)
              + G k1 v_t (cos(a) cos(b) - sin(b)/sin(a))
              - phi_t_dot k1 sin(b) / (k2 sin(a))
              + lambda_v cos(a) (sin(a) + k1 sin(b)/k2)

    with G = sin(a)/(k1 rho) + sin(b)/(k2 rho). The sin(b)/sin(a) quotients
    are singular at a = 0 with b != 0; their denominator is clamped in
    magnitude to sin_eps (sign-preserving) and the event is recorded in
    flags instead of raising, since closed-loop runs pass through a = 0.
    """
    if err.rho <= rho_eps:
        raise DegenerateRho(f"rho={err.rho:.3e} <= {rho_eps:.0e}")
    sa, sb = math.sin(err.alpha), math.sin(err.beta)
    ca, cb = math.cos(err.alpha), math.cos(err.beta)
    k1, k2 = gains.k1, gains.k2

    if abs(sa) <= sin_eps and abs(sb) > sin_eps and flags is not None:
        flags.singular_alpha = True
    sa_c = _clamped(sa, sin_eps)

    g = (sa / k1 + sb / k2) / err.rho
    coupling = g * k1 * target.v_t * (ca * cb - sb / sa_c)
    feedforward = -target.phi_t_dot * k1 * sb / (k2 * sa_c)
    damping = gains.lambda_v * ca * (sa + k1 * sb / k2)
    return gains.lambda_a * sa + coupling + feedforward + damping


def _sinc2(alpha: float) -> float:
    """sin(2a)/(2a), evaluated by series near zero."""
    if abs(alpha) < SERIES_EPS:
        x = 2.0 * alpha
        return 1.0 - x * x / 6.0
    return math.sin(2.0 * alpha) / (2.0 * alpha)


def comparative_cmd(
    err: PolarError,
    target: TargetState,
    gains: ControllerGains,
    rho_eps: float = RHO_EPS,
    alpha_eps: float = SIN_EPS,
    flags: CommandFlags | None = None,
) -> Twist:
    """Conventional comparison controller.

    The linear law is identical in form to the proposed one; the angular law

        omega = lambda_a a
              + ((a+b)/rho)(sin(2a)/(2a) cos(b) - sin(b)/a) v_t
              - (b/a) phi_t_dot
              + sin(2a)/(2a) lambda_v (a+b)

    has a-denominators that are clamped in magnitude to alpha_eps when the
    robot passes through a = 0.
    """
    if err.rho <= rho_eps:
        raise DegenerateRho(f"rho={err.rho:.3e} <= {rho_eps:.0e}")
    a, b = err.alpha, err.beta
    cb = math.cos(b)
    sb = math.sin(b)

    if abs(a) <= alpha_eps and abs(b) > alpha_eps and flags is not None:
        flags.singular_alpha = True
    a_c = _clamped(a, alpha_eps)

    v = proposed_linear(err, target, gains)
    omega = (
        gains.lambda_a * a
        + ((a + b) / err.rho) * (_sinc2(a) * cb - sb / a_c) * target.v_t
        - (b / a_c) * target.phi_t_dot
        + _sinc2(a) * gains.lambda_v * (a + b)
    )
    return Twist(v=v, omega=omega)


def lyapunov_report(
    err: PolarError,
    cmd: Twist,
    target: TargetState,
    gains: ControllerGains,
    variant: str = "proposed",
    rho_eps: float = RHO_EPS,
    strict: bool = True,
) -> LyapunovReport:
    """Lyapunov values and their rates along the current command.

    V1 = rho^2/2 for both variants. V2 is (1-cos a)/k1 + (1-cos b)/k2 for
    the proposed controller and (a^2 + b^2)/2 for the comparative one. The
    rates are chain-ruled through the analytic polar-error derivatives, so
    they reflect whatever command was actually applied (including any
    saturation). Rates are undefined at small rho: that raises
    DegenerateRho when strict, else they are reported as NaN.
    """
    if variant not in ("proposed", "comparative"):
        raise ValueError(f"unknown variant {variant!r}")
    a, b = err.alpha, err.beta
    v1 = 0.5 * err.rho * err.rho
    if variant == "proposed":
        v2 = (1.0 - math.cos(a)) / gains.k1 + (1.0 - math.cos(b)) / gains.k2
    else:
        v2 = 0.5 * (a * a + b * b)

    try:
        rho_dot, alpha_dot, beta_dot = polar_rates(err, cmd, target, rho_eps=rho_eps)
    except DegenerateRho:
        if strict:
            raise
        return LyapunovReport(variant, v1, v2, math.nan, math.nan)

    v1_dot = err.rho * rho_dot
    if variant == "proposed":
        v2_dot = math.sin(a) * alpha_dot / gains.k1 + math.sin(b) * beta_dot / gains.k2
    else:
        v2_dot = a * alpha_dot + b * beta_dot
    return LyapunovReport(variant, v1, v2, v1_dot, v2_dot)


def _clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


def saturate(raw: Twist, prev: Twist, limits: SaturationLimits, dt: float) -> Twist:
    """Clamp a raw command to magnitude bounds, then slew-limit against prev.

    Clamp order is magnitude first, slew second.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    v = _clamp(raw.v, limits.v_min, limits.v_max)
    dv = limits.accel_max * dt
    v = _clamp(v, prev.v - dv, prev.v + dv)

    w = _clamp(raw.omega, -limits.omega_abs_max, limits.omega_abs_max)
    dw = limits.alpha_accel_max * dt
    w = _clamp(w, prev.omega - dw, prev.omega + dw)
    return Twist(v=v, omega=w)
