"""Read and write scenario files.

A scenario file is a JSON document with a fixed key layout::

    {
      "map": {"shape", "n_lanes", "lane_width", "curvature", "length"},
      "actors": [{"id", "role", "lane", "length", "width"}, ...],
      "trajectories": {"<actor id>": [[x, y], ...], ...},
      "dt": ...,
      "horizon": ...,
      "curve": {"degree", "control_points", "weights"}   # optional
    }

Only positions are stored; speed, acceleration, heading and steering
are re-derived on load.  The writer emits every float in exponential
notation with 17 fractional digits, which parses back to the exact
same double and keeps export -> import -> export byte-identical.
The optional curve block never stores knots; they are rebuilt from the
degree and control-point count.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ConfigurationError
from .nurbs import uniform_curve
from .world import Actor, Scenario, derive_kinematics, generate_map

_MAP_KEYS = ("shape", "n_lanes", "lane_width", "curvature", "length")
_ACTOR_KEYS = ("id", "role", "lane", "length", "width")


def _fmt(value):
    value = float(value)
    if not np.isfinite(value):
        raise ConfigurationError("scenario files cannot hold non-finite numbers")
    return f"{value:.17e}"


def _fmt_pairs(array):
    rows = (f"[{_fmt(px)}, {_fmt(py)}]" for px, py in np.asarray(array, dtype=float))
    return "[" + ", ".join(rows) + "]"


def dump_scenario(scenario):
    """Serialize a scenario to its file format, returned as a string."""
    m = scenario.lane_map
    lines = ["{"]
    lines.append(
        '  "map": {'
        + f'"shape": {json.dumps(m.shape)}, "n_lanes": {m.n_lanes}, '
        + f'"lane_width": {_fmt(m.lane_width)}, "curvature": {_fmt(m.curvature)}, '
        + f'"length": {_fmt(m.length)}}},'
    )
    lines.append('  "actors": [')
    for i, actor in enumerate(scenario.actors):
        comma = "," if i < len(scenario.actors) - 1 else ""
        lines.append(
            "    {"
            + f'"id": {json.dumps(actor.id)}, "role": {json.dumps(actor.role)}, '
            + f'"lane": {actor.lane_index}, "length": {_fmt(actor.length)}, '
            + f'"width": {_fmt(actor.width)}}}{comma}'
        )
    lines.append("  ],")
    lines.append('  "trajectories": {')
    for i, actor in enumerate(scenario.actors):
        traj = scenario.trajectories[actor.id]
        comma = "," if i < len(scenario.actors) - 1 else ""
        lines.append(f"    {json.dumps(actor.id)}: {_fmt_pairs(traj.xy)}{comma}")
    lines.append("  },")
    lines.append(f'  "dt": {_fmt(scenario.dt)},')
    tail = "," if scenario.curve is not None else ""
    lines.append(f'  "horizon": {_fmt(scenario.horizon)}{tail}')
    if scenario.curve is not None:
        curve = scenario.curve
        weights = "[" + ", ".join(_fmt(w) for w in curve.weights) + "]"
        lines.append(
            '  "curve": {'
            + f'"degree": {curve.degree}, '
            + f'"control_points": {_fmt_pairs(curve.control_points)}, '
            + f'"weights": {weights}}}'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_scenario(scenario, path):
    """Write a scenario file to disk."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_scenario(scenario))


def _require(mapping, key, where):
    if key not in mapping:
        raise ConfigurationError(f"scenario file {where} is missing '{key}'")
    return mapping[key]


def parse_scenario(text):
    """Parse scenario file text into a Scenario."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"scenario file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigurationError("scenario file must hold a JSON object")

    map_doc = _require(doc, "map", "top level")
    for key in _MAP_KEYS:
        _require(map_doc, key, "map block")
    lane_map = generate_map(
        map_doc["shape"],
        n_lanes=int(map_doc["n_lanes"]),
        lane_width=float(map_doc["lane_width"]),
        length=float(map_doc["length"]),
        curvature=float(map_doc["curvature"]),
    )

    actors = []
    for entry in _require(doc, "actors", "top level"):
        for key in _ACTOR_KEYS:
            _require(entry, key, "actor entry")
        actors.append(
            Actor(
                id=str(entry["id"]),
                role=str(entry["role"]),
                lane_index=int(entry["lane"]),
                length=float(entry["length"]),
                width=float(entry["width"]),
            )
        )

    dt = float(_require(doc, "dt", "top level"))
    horizon = float(_require(doc, "horizon", "top level"))

    traj_doc = _require(doc, "trajectories", "top level")
    trajectories = {}
    for actor in actors:
        if actor.id not in traj_doc:
            raise ConfigurationError(f"missing trajectory for actor '{actor.id}'")
        xy = np.asarray(traj_doc[actor.id], dtype=float)
        trajectories[actor.id] = derive_kinematics(xy, dt)
    extras = set(traj_doc) - {a.id for a in actors}
    if extras:
        raise ConfigurationError(f"trajectories for unknown actors: {sorted(extras)}")

    curve = None
    if "curve" in doc:
        curve_doc = doc["curve"]
        for key in ("degree", "control_points", "weights"):
            _require(curve_doc, key, "curve block")
        curve = uniform_curve(
            np.asarray(curve_doc["control_points"], dtype=float),
            weights=np.asarray(curve_doc["weights"], dtype=float),
            degree=int(curve_doc["degree"]),
        )

    return Scenario(
        lane_map=lane_map,
        actors=tuple(actors),
        trajectories=trajectories,
        dt=dt,
        horizon=horizon,
        curve=curve,
    )


def load_scenario(path):
    """Read a scenario file from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())
