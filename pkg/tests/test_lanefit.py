import math

import mpmath
import numpy as np
import pytest

from lanetrack.exceptions import (
    AboveHorizon,
    DegeneratePolyline,
    DisjointRanges,
    EmptyPolyline,
    NonPositiveDuration,
    TooFewPoints,
)
from lanetrack.lanefit import (
    CameraModel,
    CubicPoly,
    boundary_cubic,
    centerline,
    cumulative_arclength,
    eval_poly,
    fit_cubic,
    lookahead_points,
    pixel_to_vehicle,
    resample,
    roi_filter,
)

# ------------------------------------------------------------------ camera


def _camera(pitch=0.35, height=1.2, **kw):
    return CameraModel.from_mount(
        fx=800.0, fy=800.0, cx=320.0, cy=240.0, height=height, pitch_down=pitch, **kw
    )


def test_camera_rejects_bad_inputs():
    cam = _camera()
    with pytest.raises(ValueError):
        CameraModel(K=np.zeros((3, 3)), T_veh_from_cam=cam.T_veh_from_cam, camera_height=1.0)
    bad_T = np.eye(4)
    bad_T[:3, :3] *= 2.0
    with pytest.raises(ValueError):
        CameraModel(K=cam.K, T_veh_from_cam=bad_T, camera_height=1.0)


def test_principal_point_hits_boresight_ground_point():
    # the optical axis pitched down by p from height h strikes the ground
    # at forward range h / tan(p)
    pitch, h = 0.3, 1.5
    cam = _camera(pitch=pitch, height=h)
    x, y = pixel_to_vehicle(320.0, 240.0, cam)
    assert x == pytest.approx(h / math.tan(pitch), rel=1e-9)
    assert y == pytest.approx(0.0, abs=1e-9)


def test_pixel_left_of_center_lands_left():
    cam = _camera()
    _, y = pixel_to_vehicle(250.0, 240.0, cam)
    assert y > 0  # vehicle frame: +y is left


def test_reprojection_roundtrip():
    """Project a known ground point into the image, then back out (oracle)."""
    cam = _camera(pitch=0.4, height=1.1, yaw=0.05, forward=0.3, lateral=-0.1)
    rng = np.random.default_rng(2)
    T_inv = np.linalg.inv(cam.T_veh_from_cam)
    for _ in range(50):
        g = np.array([rng.uniform(2, 20), rng.uniform(-4, 4), 0.0, 1.0])
        p_cam = (T_inv @ g)[:3]
        if p_cam[2] <= 0.1:
            continue
        uvw = cam.K @ p_cam
        u, v = uvw[0] / uvw[2], uvw[1] / uvw[2]
        gx, gy = pixel_to_vehicle(u, v, cam)
        assert gx == pytest.approx(g[0], abs=1e-8)
        assert gy == pytest.approx(g[1], abs=1e-8)


def test_above_horizon_raises():
    cam = _camera(pitch=0.05)
    with pytest.raises(AboveHorizon):
        pixel_to_vehicle(320.0, 0.0, cam)  # top of image, ray skyward


# ------------------------------------------------------------------- ROI


def test_roi_filter_box():
    pts = np.array([[1.0, 0.0], [11.0, 0.0], [5.0, -6.0], [10.0, 5.0]])
    kept = roi_filter(pts, (0.0, 10.0, -5.0, 5.0))
    assert kept.tolist() == [[1.0, 0.0], [10.0, 5.0]]


def test_roi_filter_empty_and_bad_bounds():
    assert roi_filter(np.empty((0, 2)), (0, 1, 0, 1)).shape == (0, 2)
    with pytest.raises(ValueError):
        roi_filter(np.zeros((1, 2)), (1, 1, 0, 1))


# -------------------------------------------------------------- resampling


def test_cumulative_arclength():
    s = cumulative_arclength(np.array([[0, 0], [3, 0], [3, 4]]))
    assert s.tolist() == [0.0, 3.0, 7.0]
    with pytest.raises(EmptyPolyline):
        cumulative_arclength(np.empty((0, 2)))


def test_resample_straight_line_exact():
    pts = np.array([[0.0, 0.0], [1.0, 0.0]])
    out = resample(pts, 0.25)
    assert len(out) == 5
    assert np.allclose(out[:, 0], [0, 0.25, 0.5, 0.75, 1.0])


def test_resample_count_rule():
    # S = 1.0, delta = 0.3 -> floor(S/delta) + 1 = 4 points
    out = resample(np.array([[0.0, 0.0], [1.0, 0.0]]), 0.3)
    assert len(out) == 4


def test_resample_random_polylines_property():
    """Output chords sit at k*delta_s on the cumulative arc-length table."""
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = rng.integers(2, 30)
        pts = np.cumsum(rng.uniform(-1, 1, size=(n, 2)), axis=0)
        pts = pts[np.concatenate(([True], np.any(np.diff(pts, axis=0) != 0, axis=1)))]
        if len(pts) < 2:
            continue
        delta = rng.uniform(0.05, 0.8)
        out = resample(pts, delta)
        s_tab = cumulative_arclength(pts)
        total = s_tab[-1]
        assert len(out) == int(math.floor(total / delta + 1e-9)) + 1
        s_out = cumulative_arclength(out)
        # positions measured along the original polyline
        for k, p in enumerate(out):
            assert _arc_position(pts, s_tab, p) == pytest.approx(k * delta, abs=1e-9)
        assert s_out[-1] <= total + 1e-9


def _arc_position(pts, s_tab, p):
    """Arc length of point p assuming it lies on the polyline (test helper)."""
    best = None
    for i in range(len(pts) - 1):
        seg = pts[i + 1] - pts[i]
        L2 = seg @ seg
        t = np.clip((p - pts[i]) @ seg / L2, 0.0, 1.0)
        d = np.hypot(*(pts[i] + t * seg - p))
        s = s_tab[i] + t * math.sqrt(L2)
        if best is None or d < best[0]:
            best = (d, s)
    assert best[0] < 1e-9
    return best[1]


def test_resample_drops_duplicate_vertices():
    pts = np.array([[0, 0], [0, 0], [1, 0], [1, 0], [2, 0]], dtype=float)
    out = resample(pts, 0.5)
    assert len(out) == 5


def test_resample_degenerate():
    with pytest.raises(DegeneratePolyline):
        resample(np.array([[1.0, 1.0], [1.0, 1.0]]), 0.1)
    with pytest.raises(ValueError):
        resample(np.array([[0.0, 0.0], [1.0, 0.0]]), 0.0)


# ------------------------------------------------------------- cubic fitting


def test_fit_recovers_exact_cubic():
    rng = np.random.default_rng(21)
    for _ in range(100):
        coeffs = rng.uniform(-2, 2, size=4)
        x = np.sort(rng.uniform(-3, 3, size=rng.integers(6, 30)))
        if len(np.unique(x)) < 4:
            continue
        y = np.polyval(coeffs[::-1], x)
        poly = fit_cubic(np.column_stack((x, y)))
        assert poly.order == 3
        assert np.max(np.abs(np.array(poly.coeffs) - coeffs)) < 1e-9


def test_fit_matches_extended_precision_oracle():
    """Residual no worse than an mpmath (50-digit) least-squares solve."""
    mpmath.mp.dps = 50
    rng = np.random.default_rng(22)
    for _ in range(100):
        n = int(rng.integers(6, 40))
        x = rng.uniform(-2, 8, size=n)
        y = rng.normal(0, 1, size=n) + 0.3 * x**2
        poly = fit_cubic(np.column_stack((x, y)))

        A = mpmath.matrix([[mpmath.mpf(xi) ** k for k in range(4)] for xi in x])
        b = mpmath.matrix([mpmath.mpf(yi) for yi in y])
        c = mpmath.lu_solve(A.T * A, A.T * b)  # normal equations are safe at dps=50
        res_oracle = mpmath.norm(A * c - b)

        V = np.vander(x, 4, increasing=True)
        res_ours = np.linalg.norm(V @ np.array(poly.coeffs) - y)
        assert res_ours <= float(res_oracle) + 1e-8


def test_fit_degrades_on_collinear_points():
    x = np.linspace(0, 5, 12)
    poly = fit_cubic(np.column_stack((x, 2.0 * x + 1.0)))
    assert poly.order <= 3
    assert poly.a0 == pytest.approx(1.0, abs=1e-8)
    assert poly.a1 == pytest.approx(2.0, abs=1e-8)


def test_fit_two_points_is_a_line():
    poly = fit_cubic(np.array([[0.0, 1.0], [2.0, 5.0]]))
    assert poly.order == 1
    assert poly.a1 == pytest.approx(2.0)
    assert poly.a3 == 0.0


def test_fit_repeated_x_constant():
    poly = fit_cubic(np.array([[1.0, 2.0], [1.0, 4.0], [1.0 + 1e-12, 3.0]]))
    assert poly.order <= 1


def test_fit_too_few():
    with pytest.raises(TooFewPoints):
        fit_cubic(np.array([[0.0, 0.0]]))


def test_cubic_poly_eval_and_derivative():
    p = CubicPoly(1.0, -1.0, 0.5, 0.25, 0.0, 4.0)
    xs = np.array([0.0, 1.0, 2.0])
    assert np.allclose(p(xs), 1 - xs + 0.5 * xs**2 + 0.25 * xs**3)
    assert np.allclose(p.derivative(xs), -1 + xs + 0.75 * xs**2)
    pairs = eval_poly(p, xs)
    assert pairs.shape == (3, 2)
    assert np.allclose(pairs[:, 1], p(xs))


def test_cubic_poly_validation():
    with pytest.raises(ValueError):
        CubicPoly(0, 0, 0, 0, 2.0, 1.0)
    with pytest.raises(ValueError):
        CubicPoly(math.nan, 0, 0, 0, 0.0, 1.0)


# ------------------------------------------------------------- centerline


def _line_poly(a0, a1, x_lo=0.0, x_hi=10.0):
    x = np.linspace(x_lo, x_hi, 20)
    return fit_cubic(np.column_stack((x, a0 + a1 * x)))


def test_centerline_both_lanes_mean():
    left = _line_poly(1.75, 0.0)
    right = _line_poly(-1.75, 0.0)
    res = centerline(left, right)
    assert res.mode == "both_lanes"
    xs = np.linspace(0, 10, 11)
    assert np.allclose(res.centerline(xs), 0.0, atol=1e-9)


def test_centerline_overlap_range_only():
    left = _line_poly(1.0, 0.1, 0.0, 6.0)
    right = _line_poly(-1.0, 0.1, 2.0, 10.0)
    res = centerline(left, right)
    assert res.centerline.x_lo >= 2.0 - 1e-9
    assert res.centerline.x_hi <= 6.0 + 1e-9


def test_centerline_left_only_offsets_right():
    left = _line_poly(1.75, 0.0)
    res = centerline(left, None, lane_width=3.5)
    assert res.mode == "left_only"
    xs = np.linspace(0.5, 9.5, 10)
    # synthesized right boundary 3.5 m to the right -> centerline at y = 0
    assert np.allclose(res.centerline(xs), 0.0, atol=1e-6)
    assert np.allclose(res.lane_right(xs), -1.75, atol=1e-6)


def test_centerline_right_only_offsets_left():
    right = _line_poly(-1.75, 0.0)
    res = centerline(None, right, lane_width=3.5)
    assert res.mode == "right_only"
    xs = np.linspace(0.5, 9.5, 10)
    assert np.allclose(res.centerline(xs), 0.0, atol=1e-6)


def test_centerline_offset_follows_normal_not_vertical():
    # for a sloped lane the offset must be along the normal; a vertical
    # shift of 3.5 would put the centerline at -1.75 + slope*x + 3.5/2
    left = _line_poly(0.0, 1.0)  # 45 degrees
    res = centerline(left, None, lane_width=3.5)
    # a vertical gap of g between two 45-degree lines is a perpendicular
    # separation of g/sqrt(2); the centerline must sit half a lane width
    # (1.75 m) from the detected lane, i.e. a vertical gap of 1.75*sqrt(2)
    mid = res.centerline(5.0) - left(5.0)
    assert abs(mid) / math.sqrt(2) == pytest.approx(1.75, abs=1e-6)
    assert mid < 0  # shifted toward the track interior (right of the lane)


def test_centerline_none():
    res = centerline(None, None)
    assert res.mode == "none"
    assert res.centerline is None


def test_centerline_disjoint_ranges():
    with pytest.raises(DisjointRanges):
        centerline(_line_poly(1, 0, 0.0, 3.0), _line_poly(-1, 0, 5.0, 9.0))


def test_centerline_bad_width():
    with pytest.raises(ValueError):
        centerline(_line_poly(1, 0), None, lane_width=0.0)


# --------------------------------------------------------- look-ahead points


def test_lookahead_straight():
    c = _line_poly(0.0, 0.0)
    a, b, cc = lookahead_points(c)
    assert a == (2.0, 0.0)
    assert b == (2.5, 0.0)
    assert cc == (3.0, 0.0)


def test_lookahead_diagonal_and_quadratic():
    c = _line_poly(0.0, 1.0)
    a, b, cc = lookahead_points(c)
    assert a[1] == pytest.approx(2.0, abs=1e-9)
    assert cc[1] == pytest.approx(3.0, abs=1e-9)

    x = np.linspace(0, 10, 40)
    q = fit_cubic(np.column_stack((x, 0.1 * x**2)))
    _, b, _ = lookahead_points(q)
    assert b == (2.5, pytest.approx(0.625, abs=1e-9))


def test_lookahead_validation():
    with pytest.raises(ValueError):
        lookahead_points(_line_poly(0, 0), lead=0.0)


# ------------------------------------------------------------ boundary cubic


def test_boundary_cubic_known_case():
    assert boundary_cubic(0.0, 1.0, 0.0, 0.0, 1.0) == pytest.approx((0.0, 0.0, 3.0, -2.0))


def test_boundary_cubic_constant():
    assert boundary_cubic(2.5, 2.5, 0.0, 0.0, 3.0) == pytest.approx((2.5, 0, 0, 0))


def test_boundary_cubic_reconstructs_constraints():
    rng = np.random.default_rng(31)
    for _ in range(1000):
        th0, thT = rng.uniform(-5, 5, size=2)
        r0, rT = rng.uniform(-3, 3, size=2)
        t0 = rng.uniform(0.1, 10.0)
        a0, a1, a2, a3 = boundary_cubic(th0, thT, r0, rT, t0)
        val_T = a0 + a1 * t0 + a2 * t0**2 + a3 * t0**3
        rate_T = a1 + 2 * a2 * t0 + 3 * a3 * t0**2
        assert a0 == pytest.approx(th0, abs=1e-12)
        assert a1 == pytest.approx(r0, abs=1e-12)
        assert val_T == pytest.approx(thT, abs=1e-9)
        assert rate_T == pytest.approx(rT, abs=1e-9)


def test_boundary_cubic_bad_duration():
    with pytest.raises(NonPositiveDuration):
        boundary_cubic(0, 1, 0, 0, 0.0)
