"""Road-frame conversion tests against exact line/circle geometry."""

import numpy as np
import pytest

from scengen.errors import (
    ClampWarning,
    InsufficientDataError,
    OutOfRangeError,
    ProjectionError,
)
from scengen.frenet import ReferenceLine, arc_line, straight_line

from oracles import arc_frenet_to_xy, brute_force_project


def test_straight_line_forward_map_is_identity():
    line = straight_line(200.0)
    for s, d in [(0.0, 0.0), (57.3, 2.5), (200.0, -4.0), (120.0, 0.0)]:
        x, y = line.to_cartesian(s, d)
        assert abs(x - s) < 1e-9
        assert abs(y - d) < 1e-9


def test_left_of_travel_is_positive_d():
    line = straight_line(100.0)
    s, d = line.to_frenet((50.0, 3.0))
    assert d > 0.0
    s, d = line.to_frenet((50.0, -3.0))
    assert d < 0.0


def test_arc_offset_lands_on_inner_circle():
    # counterclockwise arc of radius 100: a +2 m offset points at the
    # centre, so the offset point sits on the radius-98 circle
    line = arc_line(200.0, 100.0)
    centre = np.array([0.0, 100.0])
    for s in np.linspace(0.0, line.length, 21):
        pt = line.to_cartesian(s, 2.0)
        assert abs(np.hypot(*(pt - centre)) - 98.0) < 1e-3


def test_arc_matches_exact_circle_geometry():
    # fine spacing keeps the chord-normal tilt well under the tolerance
    line = arc_line(300.0, 100.0, spacing=0.02)
    rng = np.random.default_rng(2)
    for _ in range(100):
        s = rng.uniform(0.0, 300.0)
        d = rng.uniform(-5.0, 5.0)
        got = line.to_cartesian(s, d)
        want = arc_frenet_to_xy(s, d, 100.0)
        assert np.max(np.abs(got - want)) < 1e-3


def test_clockwise_arc_bends_right():
    line = arc_line(100.0, -100.0)
    x, y = line.to_cartesian(50.0, 0.0)
    assert y < 0.0
    assert line.heading_at(50.0) < 0.0


def test_roundtrip_straight_and_arc():
    rng = np.random.default_rng(4)
    for line in (straight_line(400.0), arc_line(400.0, 100.0),
                 arc_line(400.0, -100.0)):
        ss = rng.uniform(1.0, 399.0, size=300)
        ds = rng.uniform(-5.0, 5.0, size=300)
        for s, d in zip(ss, ds):
            x, y = line.to_cartesian(s, d)
            s2, d2 = line.to_frenet((x, y))
            assert abs(s2 - s) < 1e-6
            assert abs(d2 - d) < 1e-6


def test_projection_matches_brute_force_scan():
    rng = np.random.default_rng(6)
    # a wiggly but gently curving polyline; the blended frame may move
    # the result off the raw chord projection by about half the
    # inter-segment angle times the offset, here ~1e-3
    xs = np.linspace(0.0, 120.0, 1201)
    ys = 4.0 * np.sin(xs / 30.0)
    pts = np.column_stack([xs, ys])
    line = ReferenceLine(pts)
    for _ in range(50):
        q = np.array([rng.uniform(5.0, 115.0), rng.uniform(-8.0, 12.0)])
        s, d = line.to_frenet(q)
        s_ref, d_ref, _ = brute_force_project(pts, q)
        assert abs(s - s_ref) < 2e-3
        assert abs(d - d_ref) < 2e-3


def test_projection_is_exact_inverse_of_forward_map():
    xs = np.linspace(0.0, 120.0, 1201)
    ys = 4.0 * np.sin(xs / 30.0)
    line = ReferenceLine(np.column_stack([xs, ys]))
    rng = np.random.default_rng(13)
    for _ in range(50):
        q = np.array([rng.uniform(5.0, 115.0), rng.uniform(-8.0, 12.0)])
        s, d = line.to_frenet(q)
        back = line.to_cartesian(s, d)
        assert np.max(np.abs(back - q)) < 1e-8


def test_equidistant_tie_breaks_to_smaller_s():
    hairpin = ReferenceLine(
        [[0.0, 0.0], [10.0, 0.0], [10.0, 3.0], [0.0, 3.0]]
    )
    s, d = hairpin.to_frenet((5.0, 1.5))
    assert abs(s - 5.0) < 1e-9
    assert abs(d - 1.5) < 1e-9


def test_overhang_clamps_with_warning():
    line = straight_line(100.0)
    with pytest.warns(ClampWarning):
        x, y = line.to_cartesian(100.5, 0.0)
    assert abs(x - 100.0) < 1e-9
    with pytest.warns(ClampWarning):
        x, _ = line.to_cartesian(-0.5, 0.0)
    assert x == 0.0


def test_far_overhang_raises():
    line = straight_line(100.0)
    with pytest.raises(OutOfRangeError):
        line.to_cartesian(102.0, 0.0)
    with pytest.raises(OutOfRangeError):
        line.to_cartesian(-2.0, 0.0)


def test_projection_corridor_enforced():
    line = straight_line(100.0)
    with pytest.raises(ProjectionError):
        line.to_frenet((50.0, 80.0))


def test_batch_matches_single_calls():
    line = arc_line(300.0, 120.0)
    rng = np.random.default_rng(8)
    ss = rng.uniform(0.0, 300.0, size=64)
    ds = rng.uniform(-4.0, 4.0, size=64)
    batch = line.to_cartesian_batch(ss, ds)
    for row, s, d in zip(batch, ss, ds):
        single = line.to_cartesian(s, d)
        assert np.max(np.abs(row - single)) < 1e-12


def test_duplicate_vertices_dropped():
    line = ReferenceLine([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    assert line.length == 2.0
    with pytest.raises(InsufficientDataError):
        ReferenceLine([[1.0, 1.0], [1.0, 1.0]])


def test_heading_along_arc():
    line = arc_line(100.0, 100.0)
    assert abs(line.heading_at(0.05) - 0.0) < 1e-2
    # quarter circle would be pi/2; at s=100 on R=100 we are at 1 rad
    assert abs(line.heading_at(99.95) - 1.0) < 1e-2
