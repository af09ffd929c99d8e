"""Lane geometry pipeline.

Pixel-to-ground projection, ROI filtering, arc-length resampling, cubic
least-squares fitting via pivoted QR, centerline synthesis with
missing-lane fallback, look-ahead point extraction, and the
boundary-conditioned temporal cubic.

Polynomial order is hard-capped at 3: equispaced high-order fits
oscillate at the interval ends (Runge phenomenon), which is exactly what
a navigation path must not do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import (
    AboveHorizon,
    DegeneratePolyline,
    DisjointRanges,
    EmptyPolyline,
    NonPositiveDuration,
    TooFewPoints,
)

#: Default resampling interval (m).
DEFAULT_DELTA_S = 0.25

#: Default region of interest in the vehicle frame (x forward, y left).
DEFAULT_ROI = (0.0, 10.0, -5.0, 5.0)

#: Default lane width (m).
DEFAULT_LANE_WIDTH = 3.5

#: Grid size used when averaging/refitting centerlines.
CENTERLINE_SAMPLES = 64


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera rigidly mounted on the vehicle.

    K is the 3x3 intrinsic matrix; T_veh_from_cam the 4x4 rigid transform
    taking camera-frame points into the vehicle frame (x forward, y left,
    z up, ground at z = 0). camera_height is the mount height above ground.
    """

    K: np.ndarray
    T_veh_from_cam: np.ndarray
    camera_height: float

    def __post_init__(self):
        K = np.asarray(self.K, dtype=float)
        T = np.asarray(self.T_veh_from_cam, dtype=float)
        if K.shape != (3, 3) or K[0, 0] <= 0 or K[1, 1] <= 0:
            raise ValueError("K must be 3x3 with fx, fy > 0")
        if T.shape != (4, 4):
            raise ValueError("T_veh_from_cam must be 4x4")
        R = T[:3, :3]
        if not np.allclose(R.T @ R, np.eye(3), atol=1e-9):
            raise ValueError("rotation part of T_veh_from_cam is not orthonormal")
        if self.camera_height <= 0:
            raise ValueError("camera_height must be > 0")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "T_veh_from_cam", T)

    @classmethod
    def from_mount(
        cls,
        fx: float,
        fy: float,
        cx: float,
        cy: float,
        height: float,
        pitch_down: float,
        yaw: float = 0.0,
        forward: float = 0.0,
        lateral: float = 0.0,
    ) -> "CameraModel":
        """Build the extrinsics from a mount height, downward pitch and yaw.

        Camera convention: z optical axis, x right, y down. At zero pitch
        and yaw the optical axis points along vehicle +x.
        """
        base = np.array([[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]])
        cp, sp = math.cos(pitch_down), math.sin(pitch_down)
        pitch = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
        cyw, syw = math.cos(yaw), math.sin(yaw)
        yaw_m = np.array([[cyw, -syw, 0.0], [syw, cyw, 0.0], [0.0, 0.0, 1.0]])
        T = np.eye(4)
        T[:3, :3] = yaw_m @ pitch @ base
        T[:3, 3] = [forward, lateral, height]
        K = np.array([[fx, 0.0, cx], [0.0, fy, cy], [0.0, 0.0, 1.0]])
        return cls(K=K, T_veh_from_cam=T, camera_height=height)


def pixel_to_vehicle(u: float, v: float, cam: CameraModel) -> tuple[float, float]:
    """Back-project a pixel onto the vehicle ground plane z = 0.

    The pixel ray is taken through K^-1, rotated into the vehicle frame and
    intersected with the ground; raises AboveHorizon when the ray never
    reaches the ground ahead of the camera.
    """
    ray_cam = np.linalg.solve(cam.K, np.array([u, v, 1.0]))
    R = cam.T_veh_from_cam[:3, :3]
    origin = cam.T_veh_from_cam[:3, 3]
    d = R @ ray_cam
    if d[2] >= 0.0 or origin[2] <= 0.0:
        raise AboveHorizon(f"pixel ({u}, {v}) ray does not reach the ground plane")
    lam = -origin[2] / d[2]
    p = origin + lam * d
    return float(p[0]), float(p[1])


def roi_filter(pts: np.ndarray, roi: tuple[float, float, float, float]) -> np.ndarray:
    """Keep points inside the closed box roi = (x_min, x_max, y_min, y_max)."""
    x_min, x_max, y_min, y_max = roi
    if x_min >= x_max or y_min >= y_max:
        raise ValueError("ROI bounds must satisfy x_min < x_max and y_min < y_max")
    pts = np.asarray(pts, dtype=float)
    if len(pts) == 0:
        return pts.reshape(0, 2)
    keep = (
        (pts[:, 0] >= x_min)
        & (pts[:, 0] <= x_max)
        & (pts[:, 1] >= y_min)
        & (pts[:, 1] <= y_max)
    )
    return pts[keep]


def cumulative_arclength(pts: np.ndarray) -> np.ndarray:
    """Cumulative chord length along a polyline; S[0] = 0."""
    pts = np.asarray(pts, dtype=float)
    if len(pts) == 0:
        raise EmptyPolyline("cumulative arc length of an empty polyline")
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    return np.concatenate(([0.0], np.cumsum(seg)))


def resample(pts: np.ndarray, delta_s: float) -> np.ndarray:
    """Resample a polyline at constant arc-length spacing delta_s.

    Output points sit at arc lengths k * delta_s for k = 0..floor(S/delta_s),
    linearly interpolated within the containing segment.
    """
    if delta_s <= 0:
        raise ValueError("delta_s must be > 0")
    pts = np.asarray(pts, dtype=float)
    if len(pts) >= 2:
        # drop consecutive duplicates so every segment has positive length
        keep = np.concatenate(([True], np.any(np.diff(pts, axis=0) != 0.0, axis=1)))
        pts = pts[keep]
    if len(pts) < 2:
        raise DegeneratePolyline("resampling needs >= 2 distinct points")
    s = cumulative_arclength(pts)
    total = s[-1]
    n_out = int(math.floor(total / delta_s + 1e-9)) + 1
    targets = np.arange(n_out) * delta_s
    idx = np.clip(np.searchsorted(s, targets, side="right") - 1, 0, len(s) - 2)
    t = (targets - s[idx]) / (s[idx + 1] - s[idx])
    return pts[idx] + t[:, None] * (pts[idx + 1] - pts[idx])


@dataclass(frozen=True)
class CubicPoly:
    """y = a0 + a1 x + a2 x^2 + a3 x^3, valid over [x_lo, x_hi]."""

    a0: float
    a1: float
    a2: float
    a3: float
    x_lo: float
    x_hi: float
    order: int = 3

    def __post_init__(self):
        if self.x_lo >= self.x_hi:
            raise ValueError("x_lo must be < x_hi")
        for c in (self.a0, self.a1, self.a2, self.a3):
            if not math.isfinite(c):
                raise ValueError("coefficients must be finite")

    @property
    def coeffs(self) -> tuple[float, float, float, float]:
        return (self.a0, self.a1, self.a2, self.a3)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return ((self.a3 * x + self.a2) * x + self.a1) * x + self.a0

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return (3.0 * self.a3 * x + 2.0 * self.a2) * x + self.a1


def fit_cubic(pts: np.ndarray) -> CubicPoly:
    """Least-squares cubic through (x_i, y_i) via column-pivoted QR.

    The Vandermonde system is solved directly through its QR factors (never
    via the normal equations). On numerical rank deficiency the fit degrades
    to the highest full-rank order (quadratic, line, constant) and the
    missing coefficients are zero.
    """
    pts = np.asarray(pts, dtype=float)
    if pts.ndim != 2 or len(pts) < 2:
        raise TooFewPoints("need at least 2 points to fit")
    x, y = pts[:, 0], pts[:, 1]
    n_distinct = len(np.unique(x))
    order = min(3, n_distinct - 1, len(pts) - 1)
    if order < 0 or (order == 0 and n_distinct == 0):
        raise TooFewPoints("need at least 2 points to fit")

    while True:
        V = np.vander(x, N=order + 1, increasing=True)
        Q, R, piv = scipy.linalg.qr(V, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R))
        tol = max(V.shape) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
        rank = int(np.sum(diag > tol)) if diag.size else 0
        if rank == order + 1 or order == 0:
            break
        order = max(rank - 1, 0)

    z = scipy.linalg.solve_triangular(R[: order + 1, : order + 1], Q.T @ y)
    coeffs = np.zeros(4)
    permuted = np.zeros(order + 1)
    permuted[piv] = z
    coeffs[: order + 1] = permuted
    return CubicPoly(
        a0=coeffs[0],
        a1=coeffs[1],
        a2=coeffs[2],
        a3=coeffs[3],
        x_lo=float(np.min(x)),
        x_hi=float(np.max(x)),
        order=order,
    )


def eval_poly(poly: CubicPoly, xs) -> np.ndarray:
    """Evaluate a fitted polynomial on a set of x positions -> (x, y) pairs."""
    xs = np.asarray(xs, dtype=float)
    return np.column_stack((xs, poly(xs)))


@dataclass(frozen=True)
class CenterlineResult:
    """Outcome of centerline synthesis; centerline is None iff mode='none'."""

    mode: str  # both_lanes | left_only | right_only | none
    centerline: CubicPoly | None
    lane_left: CubicPoly | None
    lane_right: CubicPoly | None


def _offset_lane(poly: CubicPoly, distance: float, toward_left: bool) -> CubicPoly:
    """Synthesize the missing lane by offsetting along the local curve normal."""
    xs = np.linspace(poly.x_lo, poly.x_hi, CENTERLINE_SAMPLES)
    ys = poly(xs)
    slope = poly.derivative(xs)
    norm = np.sqrt(1.0 + slope * slope)
    # left normal of the graph (x, f(x)) traversed with increasing x
    nx, ny = -slope / norm, 1.0 / norm
    sign = 1.0 if toward_left else -1.0
    shifted = np.column_stack((xs + sign * distance * nx, ys + sign * distance * ny))
    return fit_cubic(shifted)


def _average_fit(left: CubicPoly, right: CubicPoly) -> CubicPoly:
    x_lo = max(left.x_lo, right.x_lo)
    x_hi = min(left.x_hi, right.x_hi)
    if x_lo >= x_hi:
        raise DisjointRanges(
            f"lane x-ranges [{left.x_lo}, {left.x_hi}] and "
            f"[{right.x_lo}, {right.x_hi}] do not overlap"
        )
    xs = np.linspace(x_lo, x_hi, CENTERLINE_SAMPLES)
    mid = 0.5 * (left(xs) + right(xs))
    return fit_cubic(np.column_stack((xs, mid)))


def centerline(
    left: CubicPoly | None,
    right: CubicPoly | None,
    lane_width: float = DEFAULT_LANE_WIDTH,
) -> CenterlineResult:
    """Synthesize the lane centerline from zero, one or two fitted lanes.

    With both lanes, the centerline is the pointwise mean of the two
    polynomials over their overlapping x-range, refit to a cubic. With one
    lane the missing side is generated by a lane-width normal offset toward
    the track interior, then averaged the same way. With none, mode='none'
    signals the minimum-speed fallback to the caller.
    """
    if lane_width <= 0:
        raise ValueError("lane_width must be > 0")
    if left is None and right is None:
        return CenterlineResult("none", None, None, None)
    if left is not None and right is not None:
        return CenterlineResult("both_lanes", _average_fit(left, right), left, right)
    if left is not None:
        synth = _offset_lane(left, lane_width, toward_left=False)
        return CenterlineResult("left_only", _average_fit(left, synth), left, synth)
    synth = _offset_lane(right, lane_width, toward_left=True)
    return CenterlineResult("right_only", _average_fit(synth, right), synth, right)


def lookahead_points(
    center: CubicPoly,
    lead: float = 2.0,
    spacing: float = 0.5,
) -> tuple[tuple[float, float], tuple[float, float], tuple[float, float]]:
    """Three look-ahead points on the centerline at lead, lead+s, lead+2s."""
    if lead <= 0 or spacing <= 0:
        raise ValueError("lead and spacing must be > 0")
    xs = (lead, lead + spacing, lead + 2.0 * spacing)
    return tuple((x, float(center(x))) for x in xs)


def boundary_cubic(
    theta0: float,
    thetaT: float,
    rate0: float,
    rateT: float,
    t0: float,
) -> tuple[float, float, float, float]:
    """Cubic in time matching value and rate constraints at t=0 and t=t0."""
    if t0 <= 0:
        raise NonPositiveDuration(f"t0 must be > 0, got {t0}")
    d = thetaT - theta0
    a0 = theta0
    a1 = rate0
    a2 = 3.0 * d / (t0 * t0) - 2.0 * rate0 / t0 - rateT / t0
    a3 = -2.0 * d / (t0 * t0 * t0) + (rate0 + rateT) / (t0 * t0)
    return a0, a1, a2, a3
