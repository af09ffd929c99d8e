"""Reference tracks: arc-length parameterized polylines with lane boundaries.

Ships a small set of desk-scale fixtures (straight, circle, oval, and a
figure course with dotted/zebra zones) used by the scenarios and tests.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

#: Vertex spacing used when generating fixture polylines (m).
FIXTURE_DS = 0.05


@dataclass(frozen=True)
class StyleSegment:
    """Boundary style over an arc-length interval [s_lo, s_hi)."""

    s_lo: float
    s_hi: float
    style: str  # solid | dotted | zebra_clutter
    dash_len: float = 1.0
    gap_len: float = 1.0

    def __post_init__(self):
        if self.style not in ("solid", "dotted", "zebra_clutter"):
            raise ValueError(f"unknown boundary style {self.style!r}")
        if self.s_lo >= self.s_hi:
            raise ValueError("s_lo must be < s_hi")


class Track:
    """A reference path with lane width and per-segment boundary styles."""

    def __init__(
        self,
        reference_path: np.ndarray,
        lane_width: float = 3.5,
        closed: bool = False,
        segments: list[StyleSegment] | None = None,
    ):
        path = np.asarray(reference_path, dtype=float)
        if path.ndim != 2 or path.shape[0] < 2 or path.shape[1] != 2:
            raise ValueError("reference_path must be an (N, 2) array with N >= 2")
        if lane_width <= 0:
            raise ValueError("lane_width must be > 0")
        seg_vec = np.diff(path, axis=0)
        seg_len = np.linalg.norm(seg_vec, axis=1)
        if np.any(seg_len == 0.0):
            keep = np.concatenate(([True], seg_len > 0.0))
            path = path[keep]
            seg_vec = np.diff(path, axis=0)
            seg_len = np.linalg.norm(seg_vec, axis=1)
        total = float(seg_len.sum())
        if total <= 0.0 or len(path) < 2:
            raise ValueError("reference_path must have positive total length")

        self.reference_path = path
        self.lane_width = float(lane_width)
        self.closed = bool(closed)
        self.segments = list(segments or [])
        self._s = np.concatenate(([0.0], np.cumsum(seg_len)))
        self._s_list = self._s.tolist()
        self._seg_vec = seg_vec
        self._seg_len = seg_len
        self._headings = np.arctan2(seg_vec[:, 1], seg_vec[:, 0])

    @property
    def length(self) -> float:
        return float(self._s[-1])

    def _locate(self, s: float) -> tuple[int, float]:
        """Segment index and position within it for arc position s."""
        if self.closed:
            s = s % self.length
        else:
            s = min(max(s, 0.0), self.length)
        i = bisect.bisect_right(self._s_list, s) - 1
        i = min(max(i, 0), len(self._seg_len) - 1)
        return i, s - self._s_list[i]

    def point_at(self, s: float) -> tuple[float, float]:
        i, ds = self._locate(s)
        frac = ds / self._seg_len[i]
        p = self.reference_path[i] + frac * self._seg_vec[i]
        return float(p[0]), float(p[1])

    def heading_at(self, s: float) -> float:
        i, _ = self._locate(s)
        return float(self._headings[i])

    def boundary_point(self, s: float, side: str) -> tuple[float, float]:
        """Lane boundary at arc position s; side is 'left' or 'right'."""
        if side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
        x, y = self.point_at(s)
        phi = self.heading_at(s)
        half = 0.5 * self.lane_width
        sign = 1.0 if side == "left" else -1.0
        # left boundary sits along the left normal (-sin phi, cos phi)
        return x - sign * half * math.sin(phi), y + sign * half * math.cos(phi)

    def style_at(self, s: float) -> StyleSegment | None:
        if self.closed:
            s = s % self.length
        for seg in self.segments:
            if seg.s_lo <= s < seg.s_hi:
                return seg
        return None

    def boundary_visible(self, s: float) -> bool:
        """Dash-gap dropout rule: dotted boundaries vanish inside the gaps."""
        seg = self.style_at(s)
        if seg is None or seg.style == "solid" or seg.style == "zebra_clutter":
            return True
        period = seg.dash_len + seg.gap_len
        if period <= 0 or seg.dash_len <= 0:
            return False
        return (s - seg.s_lo) % period < seg.dash_len

    def in_zebra(self, s: float) -> bool:
        seg = self.style_at(s)
        return seg is not None and seg.style == "zebra_clutter"

    def nearest_s(self, x: float, y: float) -> float:
        """Arc position of the path point nearest to (x, y)."""
        p = np.array([x, y])
        w = p - self.reference_path[:-1]
        t = np.einsum("ij,ij->i", w, self._seg_vec) / (self._seg_len**2)
        t = np.clip(t, 0.0, 1.0)
        proj = self.reference_path[:-1] + t[:, None] * self._seg_vec
        d2 = np.einsum("ij,ij->i", proj - p, proj - p)
        i = int(np.argmin(d2))
        return float(self._s[i] + t[i] * self._seg_len[i])


def _arc_points(cx, cy, r, phi0, phi1, ds):
    n = max(2, int(math.ceil(abs(phi1 - phi0) * r / ds)))
    ang = np.linspace(phi0, phi1, n + 1)
    return np.column_stack((cx + r * np.cos(ang), cy + r * np.sin(ang)))


def straight_track(length: float = 50.0, lane_width: float = 3.5) -> Track:
    """Open straight track along +x starting at the origin."""
    n = int(round(length / FIXTURE_DS))
    xs = np.linspace(0.0, length, n + 1)
    return Track(np.column_stack((xs, np.zeros_like(xs))), lane_width=lane_width)


def circle_track(radius: float = 15.0, lane_width: float = 3.5) -> Track:
    """Closed circular track, counterclockwise, starting at angle -pi/2."""
    pts = _arc_points(0.0, radius, radius, -0.5 * math.pi, 1.5 * math.pi, FIXTURE_DS)
    pts[-1] = pts[0]
    return Track(pts, lane_width=lane_width, closed=True)


def oval_track(
    straight_len: float = 30.0,
    radius: float = 10.0,
    lane_width: float = 3.5,
    segments: list[StyleSegment] | None = None,
) -> Track:
    """Closed oval: two straights joined by two semicircles, counterclockwise."""
    ds = FIXTURE_DS
    n = int(round(straight_len / ds))
    xs = np.linspace(0.0, straight_len, n + 1)
    bottom = np.column_stack((xs, np.zeros_like(xs)))
    arc1 = _arc_points(straight_len, radius, radius, -0.5 * math.pi, 0.5 * math.pi, ds)
    top = np.column_stack((xs[::-1], np.full_like(xs, 2.0 * radius)))
    arc2 = _arc_points(0.0, radius, radius, 0.5 * math.pi, 1.5 * math.pi, ds)
    pts = np.vstack((bottom, arc1[1:], top[1:], arc2[1:]))
    pts[-1] = pts[0]
    return Track(pts, lane_width=lane_width, closed=True, segments=segments)


def figure_course(lane_width: float = 3.5) -> Track:
    """Oval with dotted and zebra-clutter zones emulating a mixed course."""
    track = oval_track(lane_width=lane_width)
    L = track.length
    segments = [
        StyleSegment(8.0, 22.0, "dotted", dash_len=1.0, gap_len=1.0),
        StyleSegment(38.0, 44.0, "zebra_clutter"),
        StyleSegment(0.45 * L, 0.45 * L + 14.0, "dotted", dash_len=0.8, gap_len=1.2),
        StyleSegment(0.75 * L, 0.75 * L + 6.0, "zebra_clutter"),
    ]
    return oval_track(lane_width=lane_width, segments=segments)


_FIXTURES = {
    "straight": straight_track,
    "circle": circle_track,
    "oval": oval_track,
    "figure_course": figure_course,
}


def make_track(spec: dict) -> Track:
    """Build a Track from its JSON description (see docs/FORMATS.md)."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    segments = spec.pop("segments", None)
    if segments is not None:
        segments = [StyleSegment(**seg) for seg in segments]
    if kind == "polyline":
        return Track(
            np.asarray(spec["points"], dtype=float),
            lane_width=spec.get("lane_width", 3.5),
            closed=spec.get("closed", False),
            segments=segments,
        )
    if kind in ("straight", "circle", "oval"):
        if segments is not None and kind != "oval":
            track = _FIXTURES[kind](**spec)
            track.segments = segments
            return track
        if kind == "oval":
            spec["segments"] = segments
        return _FIXTURES[kind](**spec)
    if kind == "figure_course":
        return figure_course(**spec)
    raise ValueError(f"unknown track kind {kind!r}")
