"""Deterministic closed-loop scenario engine.

One control period runs: synthetic lane sensing (vision mode) or direct
path sampling (preset mode) -> centerline / moving target -> controller ->
saturation -> kinematic integration -> logging. A run is a pure function
of its Scenario: a single seeded RNG stream, no wall-clock reads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import controllers as ctl
from . import lanefit
from .controllers import CommandFlags, ControllerGains, SaturationLimits
from .exceptions import (
    CoincidentPoints,
    DegeneratePolyline,
    DegenerateRho,
    DisjointRanges,
    InvalidScenario,
    PathExhausted,
    TooFewPoints,
)
from .model import Pose, PolarError, TargetState, Twist, integrate, polar_error, target_heading_rate
from .tracks import Track

#: Fallback linear speed when no lane line is detected (m/s).
FALLBACK_V_MIN = 0.6

#: Look-ahead geometry: primary point distance and spacing (m).
LOOKAHEAD_LEAD = 2.0
LOOKAHEAD_SPACING = 0.5

CSV_HEADER = (
    "t,x,y,phi,v_cmd,omega_cmd,v_app,omega_app,"
    "x_t,y_t,phi_t,phi_t_dot,rho,alpha,beta,V1,V2,sat_flag,mode"
)


@dataclass(frozen=True)
class SensorConfig:
    """Synthetic lane-point sensor replacing the perception network."""

    point_noise_sigma: float = 0.0
    clutter_rate: float = 0.0
    frame_period: float = 0.1
    roi: tuple[float, float, float, float] = lanefit.DEFAULT_ROI
    sample_spacing: float = 0.25
    min_points: int = 4

    def __post_init__(self):
        if self.point_noise_sigma < 0:
            raise ValueError("point_noise_sigma must be >= 0")
        if self.clutter_rate < 0:
            raise ValueError("clutter_rate must be >= 0")
        if self.frame_period <= 0:
            raise ValueError("frame_period must be > 0")


@dataclass
class Scenario:
    track: Track
    mode: str  # preset_path | vision
    v_t: float
    gains: ControllerGains = field(default_factory=ControllerGains)
    limits: SaturationLimits | None = None
    dt: float = 0.01
    duration_max: float = 300.0
    initial_pose: Pose | None = None
    controller: str = "proposed"  # proposed | comparative
    sensor: SensorConfig = field(default_factory=SensorConfig)
    rng_seed: int = 0
    initial_target_s: float = 2.0

    def validate(self) -> None:
        if self.mode not in ("preset_path", "vision"):
            raise InvalidScenario(f"unknown mode {self.mode!r}")
        if self.controller not in ("proposed", "comparative"):
            raise InvalidScenario(f"unknown controller {self.controller!r}")
        if self.dt <= 0:
            raise InvalidScenario("dt must be > 0")
        if self.duration_max <= 0:
            raise InvalidScenario("duration_max must be > 0")
        if self.v_t <= 0:
            raise InvalidScenario("v_t must be > 0")
        if self.mode == "vision" and self.sensor.frame_period < self.dt:
            raise InvalidScenario("sensor frame_period must be >= dt")

    def start_pose(self) -> Pose:
        if self.initial_pose is not None:
            return self.initial_pose
        x, y = self.track.point_at(0.0)
        return Pose(x, y, self.track.heading_at(0.0))


@dataclass
class SimRecord:
    t: float
    pose: Pose
    cmd: Twist
    applied: Twist
    target: TargetState | None
    error: PolarError | None
    V1: float
    V2: float
    V1_dot: float
    V2_dot: float
    sat_flag: bool
    singular_flag: bool
    degenerate_flag: bool
    mode: str  # preset | both_lanes | left_only | right_only | none


@dataclass
class SimLog:
    dt: float
    records: list[SimRecord] = field(default_factory=list)
    termination_reason: str = "timeout"

    def __len__(self):
        return len(self.records)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(CSV_HEADER + "\n")
            for r in self.records:
                tgt = r.target
                err = r.error
                row = (
                    r.t,
                    r.pose.x,
                    r.pose.y,
                    r.pose.phi,
                    r.cmd.v,
                    r.cmd.omega,
                    r.applied.v,
                    r.applied.omega,
                    tgt.x_t if tgt else math.nan,
                    tgt.y_t if tgt else math.nan,
                    tgt.phi_t if tgt else math.nan,
                    tgt.phi_t_dot if tgt else math.nan,
                    err.rho if err else math.nan,
                    err.alpha if err else math.nan,
                    err.beta if err else math.nan,
                    r.V1,
                    r.V2,
                )
                fh.write(
                    ",".join(f"{x:.9g}" for x in row)
                    + f",{int(r.sat_flag)},{r.mode}\n"
                )


def sense_lanes(
    track: Track,
    pose: Pose,
    cfg: SensorConfig,
    rng: np.random.Generator,
    s_hint: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Synthetic lane-point sensor.

    Returns (left_pts, right_pts) in the vehicle frame: true boundary
    points inside the ROI, after dash-gap dropout, plus isotropic Gaussian
    noise and (inside zebra zones) uniformly scattered clutter. Either set
    may be empty. Identical (rng state, inputs) give identical output.
    """
    s0 = track.nearest_s(pose.x, pose.y) if s_hint is None else s_hint
    x_min, x_max, y_min, y_max = cfg.roi
    span_lo, span_hi = -2.0, x_max + 4.0
    n = int((span_hi - span_lo) / cfg.sample_spacing) + 1
    cphi, sphi = math.cos(pose.phi), math.sin(pose.phi)

    sides: dict[str, list[tuple[float, float]]] = {"left": [], "right": []}
    zebra_in_view = False
    for k in range(n):
        s = s0 + span_lo + k * cfg.sample_spacing
        if not track.closed and (s < 0.0 or s > track.length):
            continue
        if track.in_zebra(s):
            zebra_in_view = True
        if not track.boundary_visible(s):
            continue
        for side in ("left", "right"):
            gx, gy = track.boundary_point(s, side)
            dx, dy = gx - pose.x, gy - pose.y
            xv = cphi * dx + sphi * dy
            yv = -sphi * dx + cphi * dy
            if x_min <= xv <= x_max and y_min <= yv <= y_max:
                sides[side].append((xv, yv))

    out = {}
    for side in ("left", "right"):
        pts = np.asarray(sides[side], dtype=float).reshape(-1, 2)
        if cfg.point_noise_sigma > 0 and len(pts):
            pts = pts + rng.normal(0.0, cfg.point_noise_sigma, size=pts.shape)
        out[side] = pts

    if zebra_in_view and cfg.clutter_rate > 0:
        n_clutter = int(rng.poisson(cfg.clutter_rate))
        for _ in range(n_clutter):
            cx = rng.uniform(x_min, x_max)
            cy = rng.uniform(y_min, y_max)
            side = "left" if rng.random() < 0.5 else "right"
            out[side] = np.vstack((out[side], [[cx, cy]]))

    return out["left"], out["right"]


def advance_target(
    track: Track,
    s: float,
    v_t: float,
    dt: float,
    spacing: float = LOOKAHEAD_SPACING,
) -> tuple[TargetState, float]:
    """Move the preset-path target forward by v_t * dt along the track.

    The target heading rate comes from three path samples spaced like the
    vision look-ahead points; the time base is the interval the target
    needs to cover one spacing.
    """
    s_next = s + v_t * dt
    if track.closed:
        s_next %= track.length
    elif s_next > track.length:
        raise PathExhausted(f"target s={s_next:.3f} beyond track end {track.length:.3f}")
    x, y = track.point_at(s_next)
    phi = track.heading_at(s_next)
    a = track.point_at(s_next)
    b = track.point_at(s_next + spacing)
    c = track.point_at(s_next + 2.0 * spacing)
    try:
        rate = target_heading_rate(a, b, c, spacing / v_t)
    except CoincidentPoints:
        # open-track end: samples clamp onto the final vertex
        rate = 0.0
    return TargetState(x, y, phi, v_t, rate), s_next


def _fit_side(pts: np.ndarray, cfg: SensorConfig) -> lanefit.CubicPoly | None:
    """Sensor points -> resampled polyline -> cubic, or None if too sparse."""
    if len(pts) < cfg.min_points:
        return None
    ordered = pts[np.argsort(pts[:, 0])]
    try:
        resampled = lanefit.resample(ordered, lanefit.DEFAULT_DELTA_S)
        return lanefit.fit_cubic(resampled)
    except (DegeneratePolyline, TooFewPoints):
        return None


@dataclass
class SimState:
    """Mutable per-run state threaded through step()."""

    scenario: Scenario
    pose: Pose
    prev_applied: Twist
    rng: np.random.Generator
    k: int = 0
    target_s: float = 0.0
    target: TargetState | None = None
    centerline_mode: str = "preset"
    progress: float = 0.0
    robot_s: float = 0.0
    finished: str | None = None
    log: SimLog | None = None


def init_state(scenario: Scenario) -> SimState:
    scenario.validate()
    pose = scenario.start_pose()
    limits = scenario.limits
    v0 = limits.v_min if limits is not None else 0.0
    state = SimState(
        scenario=scenario,
        pose=pose,
        prev_applied=Twist(v0, 0.0),
        rng=np.random.default_rng(scenario.rng_seed),
        target_s=scenario.initial_target_s,
        robot_s=scenario.track.nearest_s(pose.x, pose.y),
        log=SimLog(dt=scenario.dt),
    )
    return state


def _vision_frame(state: SimState) -> None:
    """Sense, fit, synthesize the centerline and rebuild the global target."""
    sc = state.scenario
    left_pts, right_pts = sense_lanes(sc.track, state.pose, sc.sensor, state.rng)
    left = _fit_side(left_pts, sc.sensor)
    right = _fit_side(right_pts, sc.sensor)
    try:
        result = lanefit.centerline(left, right, sc.track.lane_width)
    except DisjointRanges:
        result = lanefit.CenterlineResult("none", None, None, None)
    state.centerline_mode = result.mode
    if result.mode == "none":
        state.target = None
        return

    a_v, b_v, c_v = lanefit.lookahead_points(
        result.centerline, LOOKAHEAD_LEAD, LOOKAHEAD_SPACING
    )
    cphi, sphi = math.cos(state.pose.phi), math.sin(state.pose.phi)

    def to_global(p):
        return (
            state.pose.x + cphi * p[0] - sphi * p[1],
            state.pose.y + sphi * p[0] + cphi * p[1],
        )

    a, b, c = to_global(a_v), to_global(b_v), to_global(c_v)
    phi_t = math.atan2(b[1] - a[1], b[0] - a[0])
    try:
        rate = target_heading_rate(a, b, c, sc.sensor.frame_period)
    except CoincidentPoints:
        rate = 0.0
    state.target = TargetState(a[0], a[1], phi_t, sc.v_t, rate)


def _update_progress(state: SimState) -> None:
    """Track the robot's unwrapped arc-length progress along the path."""
    sc = state.scenario
    s_new = sc.track.nearest_s(state.pose.x, state.pose.y)
    ds = s_new - state.robot_s
    if sc.track.closed:
        half = 0.5 * sc.track.length
        if ds > half:
            ds -= sc.track.length
        elif ds < -half:
            ds += sc.track.length
    state.progress += ds
    state.robot_s = s_new


def step(state: SimState) -> SimRecord:
    """Advance the closed loop by one control period and log the step."""
    sc = state.scenario
    dt = sc.dt
    t = state.k * dt

    if sc.mode == "preset_path":
        state.target, state.target_s = advance_target(sc.track, state.target_s, sc.v_t, dt)
        state.centerline_mode = "preset"
        # progress checks are cheap enough at 10 Hz (robot moves < 0.25 m)
        if state.k % 10 == 0:
            _update_progress(state)
    else:
        frame_steps = max(1, round(sc.sensor.frame_period / dt))
        if state.k % frame_steps == 0:
            _update_progress(state)
            _vision_frame(state)

    flags = CommandFlags()
    degenerate = False

    if state.target is None:
        # no detected lane: drive straight at the preset minimum speed
        v_min = sc.limits.v_min if sc.limits is not None else FALLBACK_V_MIN
        raw = Twist(v_min, 0.0)
        applied = raw
        err = None
        v1 = v2 = v1_dot = v2_dot = math.nan
    else:
        err = polar_error(state.pose, state.target)
        if sc.controller == "proposed":
            v = ctl.proposed_linear(err, state.target, sc.gains)
            try:
                omega = ctl.proposed_angular(err, state.target, sc.gains, flags=flags)
            except DegenerateRho:
                omega = state.prev_applied.omega
                degenerate = True
            raw = Twist(v, omega)
        else:
            try:
                raw = ctl.comparative_cmd(err, state.target, sc.gains, flags=flags)
            except DegenerateRho:
                raw = Twist(
                    ctl.proposed_linear(err, state.target, sc.gains),
                    state.prev_applied.omega,
                )
                degenerate = True
        applied = (
            ctl.saturate(raw, state.prev_applied, sc.limits, dt)
            if sc.limits is not None
            else raw
        )
        variant = "proposed" if sc.controller == "proposed" else "comparative"
        report = ctl.lyapunov_report(
            err, applied, state.target, sc.gains, variant=variant, strict=False
        )
        v1, v2, v1_dot, v2_dot = report.V1, report.V2, report.V1_dot, report.V2_dot

    sat = (
        abs(applied.v - raw.v) > 1e-12 or abs(applied.omega - raw.omega) > 1e-12
    )
    record = SimRecord(
        t=t,
        pose=state.pose,
        cmd=raw,
        applied=applied,
        target=state.target,
        error=err,
        V1=v1,
        V2=v2,
        V1_dot=v1_dot,
        V2_dot=v2_dot,
        sat_flag=sat,
        singular_flag=flags.singular_alpha,
        degenerate_flag=degenerate,
        mode=state.centerline_mode,
    )
    state.log.records.append(record)
    state.pose = integrate(state.pose, applied, dt)
    state.prev_applied = applied
    state.k += 1
    return record


def _lap_complete(state: SimState) -> bool:
    sc = state.scenario
    track = sc.track
    if track.closed:
        if state.progress < track.length:
            return False
        x0, y0 = track.point_at(0.0)
        return math.hypot(state.pose.x - x0, state.pose.y - y0) < 1.0
    if sc.mode == "vision":
        return state.progress >= track.length - (LOOKAHEAD_LEAD + 2 * LOOKAHEAD_SPACING)
    return False


def run(scenario: Scenario) -> SimLog:
    """Run a scenario to lap completion, path exhaustion, or timeout."""
    state = init_state(scenario)
    n_max = int(round(scenario.duration_max / scenario.dt))
    log = state.log
    for _ in range(n_max):
        try:
            step(state)
        except PathExhausted:
            log.termination_reason = "finished"
            return log
        if _lap_complete(state):
            log.termination_reason = "completed"
            return log
    log.termination_reason = "timeout"
    return log
