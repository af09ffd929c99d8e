"""Trajectory evaluation: cross-track error and the run metric vector."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .angles import wrap_angle
from .exceptions import DegeneratePath, EmptyLog

#: Steps before this time are excluded from the speed metrics (launch transient).
DEFAULT_TRANSIENT_S = 10.0


def _path_arrays(path: np.ndarray):
    path = np.asarray(path, dtype=float)
    if path.ndim != 2 or len(path) < 2:
        raise DegeneratePath("path must have at least 2 points")
    seg = np.diff(path, axis=0)
    seg_len2 = np.einsum("ij,ij->i", seg, seg)
    if np.all(seg_len2 == 0.0):
        raise DegeneratePath("path has zero length")
    seg_len2 = np.where(seg_len2 == 0.0, 1.0, seg_len2)
    return path, seg, seg_len2


def cross_track(point, path: np.ndarray) -> float:
    """Signed perpendicular distance to the nearest path segment.

    Positive to the path's left (in its traversal direction).
    """
    path, seg, seg_len2 = _path_arrays(path)
    return _cross_track_one(np.asarray(point, dtype=float), path, seg, seg_len2)[0]


def _cross_track_one(p, path, seg, seg_len2):
    w = p - path[:-1]
    t = np.clip(np.einsum("ij,ij->i", w, seg) / seg_len2, 0.0, 1.0)
    proj = path[:-1] + t[:, None] * seg
    diff = p - proj
    d2 = np.einsum("ij,ij->i", diff, diff)
    i = int(np.argmin(d2))
    cross = seg[i, 0] * diff[i, 1] - seg[i, 1] * diff[i, 0]
    dist = math.sqrt(d2[i])
    return math.copysign(dist, cross) if cross != 0.0 else dist, i, t[i]


def _path_tangent_heading(path, i, t):
    """Heading of the path tangent at the foot point, from adjacent vertices."""
    n = len(path)
    j = i if t < 0.5 else min(i + 1, n - 1)
    lo, hi = max(j - 1, 0), min(j + 1, n - 1)
    d = path[hi] - path[lo]
    return math.atan2(d[1], d[0])


@dataclass(frozen=True)
class MetricsReport:
    """The per-run metric vector (all values non-negative)."""

    completion_time: float
    avg_linear_speed: float
    avg_angular_speed: float
    mae_lateral: float
    mae_orientation: float
    rmse_linear_speed: float
    linear_speed_deviation_pct: float
    accumulated_orientation: float
    transient_skip_s: float
    speed_deviation_definition: str

    def as_dict(self) -> dict:
        return {
            "completion_time": self.completion_time,
            "avg_linear_speed": self.avg_linear_speed,
            "avg_angular_speed": self.avg_angular_speed,
            "mae_lateral": self.mae_lateral,
            "mae_orientation": self.mae_orientation,
            "rmse_linear_speed": self.rmse_linear_speed,
            "linear_speed_deviation_pct": self.linear_speed_deviation_pct,
            "accumulated_orientation": self.accumulated_orientation,
            "transient_skip_s": self.transient_skip_s,
            "speed_deviation_definition": self.speed_deviation_definition,
        }

    def csv_row(self) -> str:
        keys = list(self.as_dict().keys())
        vals = self.as_dict()
        header = ",".join(keys)
        row = ",".join(
            f"{vals[k]:.9g}" if isinstance(vals[k], float) else str(vals[k])
            for k in keys
        )
        return header + "\n" + row + "\n"


def compute_metrics(
    t: np.ndarray,
    xy: np.ndarray,
    phi: np.ndarray,
    v_app: np.ndarray,
    omega_app: np.ndarray,
    path: np.ndarray,
    v_t: float,
    transient_s: float = DEFAULT_TRANSIENT_S,
    deviation: str = "max",
) -> MetricsReport:
    """Compute the run metric vector from per-step trajectory arrays.

    mae_lateral / mae_orientation are taken over the whole run; the speed
    metrics over the post-transient window t >= transient_s (whole run if
    shorter). 'Linear speed deviation' is the max relative deviation from
    v_t over that window (deviation="mean" switches to the mean).
    """
    t = np.asarray(t, dtype=float)
    if t.size == 0:
        raise EmptyLog("metrics need a non-empty log")
    if deviation not in ("max", "mean"):
        raise ValueError("deviation must be 'max' or 'mean'")
    xy = np.asarray(xy, dtype=float)
    phi = np.asarray(phi, dtype=float)
    v_app = np.asarray(v_app, dtype=float)
    omega_app = np.asarray(omega_app, dtype=float)
    path_a, seg, seg_len2 = _path_arrays(path)

    lat = np.empty(len(t))
    head_err = np.empty(len(t))
    for k in range(len(t)):
        d, i, frac = _cross_track_one(xy[k], path_a, seg, seg_len2)
        lat[k] = d
        phi_ref = _path_tangent_heading(path_a, i, frac)
        head_err[k] = wrap_angle(phi[k] - phi_ref)

    window = t >= transient_s
    if not window.any():
        window = np.ones_like(t, dtype=bool)
    dv = v_app[window] - v_t

    completion_time = float(t[-1])
    travelled = float(np.sum(np.linalg.norm(np.diff(xy, axis=0), axis=1)))
    dphi = np.array([wrap_angle(d) for d in np.diff(phi)])
    deviation_val = np.max(np.abs(dv)) if deviation == "max" else np.mean(np.abs(dv))

    return MetricsReport(
        completion_time=completion_time,
        avg_linear_speed=travelled / completion_time if completion_time > 0 else 0.0,
        avg_angular_speed=float(np.mean(np.abs(omega_app))),
        mae_lateral=float(np.mean(np.abs(lat))),
        mae_orientation=float(np.mean(np.abs(head_err))),
        rmse_linear_speed=float(np.sqrt(np.mean(dv * dv))),
        linear_speed_deviation_pct=float(100.0 * deviation_val / v_t),
        accumulated_orientation=float(np.sum(np.abs(dphi))),
        transient_skip_s=transient_s,
        speed_deviation_definition=deviation + "_relative",
    )


def metrics_from_log(log, path: np.ndarray, v_t: float, **kwargs) -> MetricsReport:
    """Convenience wrapper taking a SimLog."""
    recs = log.records
    if not recs:
        raise EmptyLog("metrics need a non-empty log")
    t = np.array([r.t for r in recs])
    xy = np.array([(r.pose.x, r.pose.y) for r in recs])
    phi = np.array([r.pose.phi for r in recs])
    v_app = np.array([r.applied.v for r in recs])
    omega_app = np.array([r.applied.omega for r in recs])
    return compute_metrics(t, xy, phi, v_app, omega_app, path, v_t, **kwargs)
