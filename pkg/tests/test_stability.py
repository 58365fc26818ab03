import itertools
import math

import numpy as np
import pytest

from sixbar.dynamics import WorldConfig
from sixbar.errors import DegenerateSupportError
from sixbar.stability import (
    FailureMode,
    FaceChange,
    classify_failure,
    convex_hull_2d,
    directional_margin,
    max_incline_no_slip,
    project_com,
    stability_margins,
    support_polygon,
)


# -- convex hull ---------------------------------------------------------------


def oracle_hull_vertices(points):
    """O(n^4) hull-vertex oracle: p is interior iff it lies in (or on) a
    triangle of other points, or strictly inside a segment of two others."""
    pts = sorted(set(map(tuple, points)))

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def on_segment(p, a, b):
        if cross(a, b, p) != 0:
            return False
        return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))

    def in_triangle(p, a, b, c):
        d1 = cross(p, a, b)
        d2 = cross(p, b, c)
        d3 = cross(p, c, a)
        has_neg = (d1 < 0) or (d2 < 0) or (d3 < 0)
        has_pos = (d1 > 0) or (d2 > 0) or (d3 > 0)
        return not (has_neg and has_pos)

    verts = []
    for p in pts:
        others = [q for q in pts if q != p]
        interior = False
        for a, b in itertools.combinations(others, 2):
            if on_segment(p, a, b):
                interior = True
                break
        if not interior:
            for a, b, c in itertools.combinations(others, 3):
                if cross(a, b, c) != 0 and in_triangle(p, a, b, c):
                    interior = True
                    break
        if not interior:
            verts.append(p)
    return set(verts)


def test_hull_triangle():
    hull = convex_hull_2d(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    assert {tuple(v) for v in hull} == {(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)}


def test_hull_square_with_center_dropped():
    pts = [[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]]
    hull = convex_hull_2d(np.array(pts, float))
    assert {tuple(v) for v in hull} == {(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)}


def test_hull_is_ccw():
    rng = np.random.default_rng(7)
    pts = rng.normal(size=(10, 2))
    hull = convex_hull_2d(pts)
    area2 = 0.0
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        area2 += a[0] * b[1] - a[1] * b[0]
    assert area2 > 0


def test_hull_collinear_edge_points_dropped():
    pts = np.array([[0, 0], [2, 0], [1, 0], [0, 2], [0, 1], [2, 2]], float)
    hull = convex_hull_2d(pts)
    assert {tuple(v) for v in hull} == {(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)}


def test_hull_matches_oracle_on_random_integer_sets():
    rng = np.random.default_rng(12345)
    checked = 0
    for _ in range(1000):
        n = rng.integers(3, 11)
        pts = rng.integers(-6, 7, size=(n, 2)).astype(float)
        distinct = {tuple(p) for p in pts}
        try:
            hull = convex_hull_2d(pts)
        except DegenerateSupportError:
            # fewer than 3 distinct points or all collinear: oracle agrees
            if len(distinct) >= 3:
                xs = sorted(distinct)
                o = xs[0]
                assert all(
                    (a[0] - o[0]) * (b[1] - o[1]) == (a[1] - o[1]) * (b[0] - o[0])
                    for a in xs for b in xs
                )
            continue
        assert {tuple(v) for v in hull} == oracle_hull_vertices(pts)
        checked += 1
    assert checked > 800


def test_degenerate_inputs():
    with pytest.raises(DegenerateSupportError):
        support_polygon(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))
    with pytest.raises(DegenerateSupportError):
        support_polygon(np.array([[0, 0, 0], [1, 1, 0], [2, 2, 0], [3, 3, 0]], float))


def test_support_polygon_drops_z():
    poly = support_polygon(np.array([[0, 0, 0.5], [4, 0, 0.5], [0, 3, 0.4]], float))
    assert poly.vertices.shape == (3, 2)


# -- CoM projection --------------------------------------------------------------


def test_projection_identity_on_flat():
    w = WorldConfig(incline_deg=0.0)
    p = project_com(np.array([3.0, -2.0, 11.0]), w)
    assert p == pytest.approx([3.0, -2.0])


def test_projection_downhill_offset():
    w = WorldConfig(incline_deg=24.0)
    p = project_com(np.array([0.0, 1.0, 12.0]), w)
    assert p[0] == pytest.approx(-12.0 * math.tan(math.radians(24.0)), abs=1e-12)
    assert p[0] == pytest.approx(-5.343, abs=2e-3)
    assert p[1] == 1.0


def test_projection_continuous_in_theta():
    com = np.array([1.0, 0.0, 9.0])
    prev = project_com(com, WorldConfig(incline_deg=0.0))[0]
    for deg in np.arange(0.5, 40.0, 0.5):
        cur = project_com(com, WorldConfig(incline_deg=float(deg)))[0]
        assert abs(cur - prev) < 0.2
        prev = cur


# -- margins ---------------------------------------------------------------------


def equilateral(side):
    h = side * math.sqrt(3) / 2
    return support_polygon(np.array([
        [h * 2 / 3, 0.0, 0.0],
        [-h / 3, side / 2, 0.0],
        [-h / 3, -side / 2, 0.0],
    ]))


def test_margin_at_centroid_of_equilateral():
    side = 12.0
    poly = equilateral(side)
    m = stability_margins(np.array([0.0, 0.0]), poly)
    # centroid to an edge of an equilateral triangle: side / (2*sqrt(3))
    assert m.downhill_margin == pytest.approx(side / (2 * math.sqrt(3)), abs=1e-9)
    assert m.uphill_margin > 0


def test_margin_sign_outside():
    poly = equilateral(12.0)
    far_uphill = np.array([20.0, 0.0])
    m = stability_margins(far_uphill, poly)
    assert m.uphill_margin < 0
    assert m.downhill_margin > 0


def test_margins_positive_strictly_inside():
    poly = support_polygon(np.array([[0, 0, 0], [10, 0, 0], [10, 8, 0], [0, 8, 0]], float))
    m = stability_margins(np.array([5.0, 4.0]), poly)
    assert m.uphill_margin == pytest.approx(5.0)
    assert m.downhill_margin == pytest.approx(5.0)


def test_directional_margin_tie_break_deterministic():
    poly = support_polygon(np.array([[0, 0, 0], [2, 0, 0], [2, 2, 0], [0, 2, 0]], float))
    d = directional_margin(np.array([1.0, 1.0]), poly, np.array([1.0, 1.0]))
    assert d == pytest.approx(1.0)


# -- slip bound --------------------------------------------------------------------


def test_slip_bound_values():
    assert max_incline_no_slip(0.49) == pytest.approx(26.10, abs=0.01)
    assert max_incline_no_slip(0.42) == pytest.approx(22.78, abs=0.01)
    assert max_incline_no_slip(0.57) == pytest.approx(29.68, abs=0.01)
    assert max_incline_no_slip(0.0) == 0.0
    assert max_incline_no_slip(1.0) == pytest.approx(45.0, abs=1e-12)


def test_slip_bound_exactness_against_arctan():
    for mu in np.linspace(0.0, 3.0, 50):
        assert max_incline_no_slip(float(mu)) == math.degrees(math.atan(mu))


def test_slip_bound_rejects_negative():
    with pytest.raises(ValueError):
        max_incline_no_slip(-0.1)


# -- failure classification ---------------------------------------------------------


def ev(t, a, b, dx):
    return FaceChange(time=t, from_face=a, to_face=b, dx=dx)


def test_classify_success():
    assert classify_failure([ev(1, 0, 4, 8.0)], 12.0, True) is FailureMode.NONE


def test_classify_rolled_back():
    events = [ev(1, 0, 4, 8.0), ev(2, 4, 0, -8.0)]
    assert classify_failure(events, 0.0, False) is FailureMode.ROLLED_BACK


def test_classify_slipped():
    assert classify_failure([], 6.0, False) is FailureMode.SLIPPED


def test_classify_stalled():
    assert classify_failure([], 0.5, False) is FailureMode.STALLED
    assert classify_failure([ev(1, 0, 4, 8.0)], 1.0, False) is FailureMode.STALLED


# -- margin/tipping consistency ------------------------------------------------


def test_forward_tip_preceded_by_nonpositive_uphill_margin():
    # a forward face change only happens after the projected CoM crossed the
    # uphill edge: the logged margin trace (trial sampling rate) must dip
    # non-positive within the 50-sample lookback before the tip
    from sixbar.dynamics import init_resting, step
    from sixbar.harness import default_gait
    from sixbar.stability import state_support
    from sixbar.topology import build_six_bar

    gait = default_gait()
    topo = build_six_bar(25.0, actuated_cables=[g.cable for g in gait])
    world = WorldConfig()
    state = init_resting(topo, world, gait[0].face, yaw=gait[0].yaw)
    state.target_fraction[gait[0].cable] = 1.0 - 0.74

    sample_every = max(1, int(round((1.0 / 30.0) / world.dt)))
    margins = []
    start_face = state.current_face()
    tipped = False
    for i in range(int(4.0 / world.dt)):
        step(state)
        if i % sample_every == 0:
            try:
                _, _, m = state_support(state)
                margins.append(m.uphill_margin)
            except Exception:
                margins.append(math.nan)
            f = state.current_face()
            if f is not None and f != start_face:
                tipped = True
                break
    assert tipped, "contraction should tip the robot"
    window = [m for m in margins[-50:] if not math.isnan(m)]
    assert min(window) <= 0.0
