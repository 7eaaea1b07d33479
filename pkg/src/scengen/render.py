"""Static vector images of simulated scenarios.

One scenario becomes one SVG: lane boundaries in gray, one polyline per
actor colored by role, translucent footprints at the start poses, solid
outlines at the final poses, and a single marker at the first contact
if any two actors touch.  Output is deterministic byte for byte so
images can be diffed across runs.
"""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")

from matplotlib import pyplot as plt
from matplotlib.patches import Polygon

from .world import (
    ROLE_ADVERSARIAL,
    ROLE_EGO,
    footprint_corners,
    rectangle_clearance,
)

ROLE_COLORS = {ROLE_EGO: "gold", ROLE_ADVERSARIAL: "red"}
OTHER_COLOR = "royalblue"
BOUNDARY_COLOR = "0.6"
# centerlines are sampled at 0.1 m; boundaries stay visually smooth at 1 m
BOUNDARY_STEP = 10
SVG_HASH_SALT = "scengen"


def first_contact(scenario):
    """Earliest footprint contact between any two actors.

    Returns ``(tick, id_a, id_b)`` for the first tick at which two
    rectangles touch, or None when every pair keeps clear throughout.
    Pairs are scanned in canonical actor order, so simultaneous
    contacts resolve deterministically.
    """
    order = scenario.actor_order()
    corners = {}
    for actor in order:
        traj = scenario.trajectories[actor.id]
        corners[actor.id] = footprint_corners(
            traj.x, traj.y, traj.psi, actor.length, actor.width)
    hit = None
    for i, a in enumerate(order):
        for b in order[i + 1:]:
            clearance = rectangle_clearance(corners[a.id], corners[b.id])
            touching = np.flatnonzero(clearance == 0.0)
            if touching.size and (hit is None or touching[0] < hit[0]):
                hit = (int(touching[0]), a.id, b.id)
    return hit


def _offset_polyline(points, shift):
    """Shift a polyline along its left normal by a constant amount."""
    delta = np.gradient(points, axis=0)
    tangent = delta / np.linalg.norm(delta, axis=1, keepdims=True)
    normal = np.column_stack([-tangent[:, 1], tangent[:, 0]])
    return points + shift * normal


def _boundaries(lane_map):
    """The n_lanes + 1 painted boundary polylines, decimated for size."""
    half = lane_map.lane_width / 2.0
    lines = [_offset_polyline(lane_map.lanes[0].points, half)]
    for lane in lane_map.lanes:
        lines.append(_offset_polyline(lane.points, -half))
    decimated = []
    for line in lines:
        keep = line[::BOUNDARY_STEP]
        if not np.array_equal(keep[-1], line[-1]):
            keep = np.vstack([keep, line[-1]])
        decimated.append(keep)
    return decimated


def _actor_color(actor):
    return ROLE_COLORS.get(actor.role, OTHER_COLOR)


def _draw_footprint(ax, corners, color, filled):
    patch = Polygon(corners, closed=True,
                    facecolor=color if filled else "none",
                    edgecolor=color, alpha=0.35 if filled else 1.0,
                    linewidth=1.0, zorder=3)
    ax.add_patch(patch)


def render_scenario(scenario, path):
    """Write the scenario as an SVG image at ``path``."""
    fig, ax = plt.subplots(figsize=(11.0, 3.4))
    try:
        for k, line in enumerate(_boundaries(scenario.lane_map)):
            outer = k in (0, scenario.lane_map.n_lanes)
            ax.plot(line[:, 0], line[:, 1], color=BOUNDARY_COLOR,
                    linewidth=1.2 if outer else 0.8,
                    linestyle="-" if outer else (0, (6, 6)), zorder=1)

        seen_roles = set()
        for actor in scenario.actor_order():
            traj = scenario.trajectories[actor.id]
            color = _actor_color(actor)
            label = actor.role if actor.role not in seen_roles else None
            seen_roles.add(actor.role)
            ax.plot(traj.x, traj.y, color=color, linewidth=1.6,
                    label=label, zorder=2)
            corners = footprint_corners(traj.x, traj.y, traj.psi,
                                        actor.length, actor.width)
            _draw_footprint(ax, corners[0], color, filled=True)
            _draw_footprint(ax, corners[-1], color, filled=False)

        contact = first_contact(scenario)
        if contact is not None:
            tick, id_a, id_b = contact
            ta = scenario.trajectories[id_a]
            tb = scenario.trajectories[id_b]
            cx = (ta.x[tick] + tb.x[tick]) / 2.0
            cy = (ta.y[tick] + tb.y[tick]) / 2.0
            ax.plot([cx], [cy], marker="x", markersize=11.0,
                    markeredgewidth=2.4, color="black", zorder=4)
            ax.annotate(f"first contact {tick * scenario.dt:.1f} s",
                        (cx, cy), textcoords="offset points",
                        xytext=(8, 9), fontsize=9, zorder=4)

        xs = np.concatenate(
            [scenario.trajectories[a.id].x for a in scenario.actors])
        span = max(xs.max() - xs.min(), 10.0)
        ax.set_xlim(xs.min() - 0.05 * span, xs.max() + 0.05 * span)
        road_half = scenario.lane_map.n_lanes * scenario.lane_map.lane_width / 2.0
        ys = np.concatenate(
            [scenario.trajectories[a.id].y for a in scenario.actors])
        ax.set_ylim(min(ys.min(), -road_half) - 2.0,
                    max(ys.max(), road_half) + 2.0)
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
        ax.legend(loc="upper right", fontsize=9, framealpha=0.9)
        fig.tight_layout()
        with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
            fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
