"""Scenario images: geometry of the drawn elements and determinism."""

import numpy as np
import pytest

from scengen.render import _boundaries, first_contact, render_scenario
from scengen.world import Actor, Scenario, derive_kinematics, generate_map


def _lane_following_trajectory(y, speed, n=101, dt=0.1, x0=0.0):
    xs = x0 + speed * dt * np.arange(n)
    return derive_kinematics(np.column_stack([xs, np.full(n, y)]), dt)


def _scenario(adv_speed=10.0, adv_x0=60.0, with_other=False):
    lane_map = generate_map("straight", n_lanes=2, length=500.0)
    actors = [
        Actor(id="ego", role="ego", lane_index=1),
        Actor(id="adv", role="adversarial", lane_index=1),
    ]
    trajectories = {
        "ego": _lane_following_trajectory(-1.75, 10.0),
        "adv": _lane_following_trajectory(-1.75, adv_speed, x0=adv_x0),
    }
    if with_other:
        actors.append(Actor(id="npc0", role="other", lane_index=0))
        trajectories["npc0"] = _lane_following_trajectory(1.75, 8.0, x0=20.0)
    return Scenario(lane_map=lane_map, actors=tuple(actors),
                    trajectories=trajectories, dt=0.1, horizon=10.0)


def test_boundary_count_and_offsets():
    lane_map = generate_map("straight", n_lanes=3, length=500.0)
    lines = _boundaries(lane_map)
    assert len(lines) == 4
    levels = sorted(float(line[:, 1].mean()) for line in lines)
    assert levels == pytest.approx([-5.25, -1.75, 1.75, 5.25])
    for line in lines:
        assert np.allclose(line[:, 1], line[0, 1], atol=1e-9)
        assert line[-1, 0] == pytest.approx(500.0)


def test_boundaries_follow_curved_maps():
    lane_map = generate_map("curved", n_lanes=2, length=400.0, curvature=0.01)
    lines = _boundaries(lane_map)
    assert len(lines) == 3
    # each boundary keeps a constant distance from the arc's centre
    centre = np.array([0.0, 100.0])
    for line in lines:
        radii = np.hypot(*(line - centre).T)
        assert np.allclose(radii, radii[0], atol=1e-3)


def test_first_contact_tick_is_exact():
    # the ego closes at 1 m per tick on a stopped adversary 20 m ahead;
    # rectangles touch once centers come within one car length
    scenario = _scenario(adv_speed=0.0, adv_x0=20.0)
    hit = first_contact(scenario)
    assert hit is not None
    tick, id_a, id_b = hit
    assert {id_a, id_b} == {"ego", "adv"}
    assert tick == 16


def test_first_contact_none_when_all_keep_clear():
    assert first_contact(_scenario(adv_speed=10.0, adv_x0=60.0)) is None


def test_render_writes_deterministic_svg(tmp_path):
    scenario = _scenario(adv_speed=0.0, adv_x0=20.0, with_other=True)
    path_a = tmp_path / "a.svg"
    path_b = tmp_path / "b.svg"
    render_scenario(scenario, path_a)
    render_scenario(scenario, path_b)
    raw = path_a.read_bytes()
    assert raw.startswith(b"<?xml")
    assert raw == path_b.read_bytes()


def test_render_marks_collisions_with_one_annotation(tmp_path):
    scenario = _scenario(adv_speed=0.0, adv_x0=20.0)
    out = tmp_path / "crash.svg"
    render_scenario(scenario, out)
    text = out.read_text(encoding="utf-8")
    assert text.count("first contact") == 1
    assert "first contact 1.6 s" in text


def test_render_omits_the_marker_without_contact(tmp_path):
    out = tmp_path / "clean.svg"
    render_scenario(_scenario(), out)
    assert "first contact" not in out.read_text(encoding="utf-8")


def test_role_colors_reach_the_image(tmp_path):
    out = tmp_path / "colors.svg"
    render_scenario(_scenario(with_other=True), out)
    text = out.read_text(encoding="utf-8").lower()
    assert "#ffd700" in text
    assert "#ff0000" in text
    assert "#4169e1" in text
