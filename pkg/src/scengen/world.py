"""Synthetic multi-lane maps, actors, and time-indexed trajectories.

The world model is deliberately small: a straight or constant-curvature
road with parallel lanes, rectangular vehicle footprints, and per-tick
kinematic signals derived from positions by finite differences.  Lanes
are indexed left to right; lane centerline polylines of an arc map are
sampled at shared angular stations so that vertices of adjacent lanes
are radially aligned and exactly ``lane_width`` apart.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InconsistencyError, InsufficientDataError
from .frenet import ReferenceLine

VEHICLE_LENGTH = 4.5
VEHICLE_WIDTH = 1.8
WHEELBASE = 2.8

ROLE_EGO = "ego"
ROLE_ADVERSARIAL = "adversarial"
ROLE_OTHER = "other"

MAP_SHAPES = ("straight", "curved")
MAX_CURVATURE = 0.02
MIN_MAP_LENGTH = 300.0
CENTERLINE_SPACING = 0.1

# displacements below this are treated as standstill when deriving headings
HEADING_HOLD_DISPLACEMENT = 1e-4
# floor on v*dt in the steering denominator (0.1 m/s at dt = 0.1 s)
STEER_SPEED_FLOOR = 1e-2


def wrap_angle(theta):
    """Wrap an angle (scalar or array) to (-pi, pi]."""
    wrapped = np.mod(np.asarray(theta, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


@dataclass(frozen=True)
class LaneMap:
    """A multi-lane road: parallel centerlines plus shape metadata.

    ``lanes[i]`` is the centerline of lane ``i``, ordered left to right.
    ``length`` is the arclength of the road axis (the line equidistant
    from the outermost centerlines); on arc maps individual lanes are
    shorter or longer than the axis in proportion to their radii.
    """

    shape: str
    n_lanes: int
    lane_width: float
    curvature: float
    length: float
    lanes: tuple = field(repr=False)

    def lane_offset(self, lane_index):
        """Signed lateral offset of a lane centerline from the road axis."""
        return ((self.n_lanes - 1) / 2.0 - lane_index) * self.lane_width

    def lane_radius(self, lane_index):
        """Turn radius of a lane centerline; ``inf`` on straight maps."""
        if self.curvature == 0.0:
            return np.inf
        axis_radius = 1.0 / abs(self.curvature)
        if self.curvature > 0.0:
            return axis_radius - self.lane_offset(lane_index)
        return axis_radius + self.lane_offset(lane_index)

    def transfer_pose(self, s, d, from_lane, to_lane):
        """Re-express Frenet poses of one lane frame in another lane frame.

        Exact for the underlying road geometry: parallel lanes share
        normals, so the lateral part is a constant shift and the
        longitudinal part rescales with the radius ratio on arcs.
        Accepts scalars or arrays.
        """
        shift = self.lane_offset(from_lane) - self.lane_offset(to_lane)
        if self.curvature == 0.0:
            ratio = 1.0
        else:
            ratio = self.lane_radius(to_lane) / self.lane_radius(from_lane)
        return np.asarray(s) * ratio, np.asarray(d) + shift

    def lateral_bounds(self, lane_index, margin=0.0):
        """Lateral extent of the paved road in a lane's own frame."""
        half = self.n_lanes * self.lane_width / 2.0 + margin
        offset = self.lane_offset(lane_index)
        return -half - offset, half - offset


def generate_map(shape, n_lanes=3, lane_width=3.5, length=500.0, curvature=0.0):
    """Build a LaneMap with centerline polylines at ~0.1 m spacing.

    Parameters
    ----------
    shape : str
        "straight" or "curved" (constant-curvature arc).
    n_lanes : int
        Number of lanes, at least 2.
    lane_width : float
        Centerline-to-centerline spacing in meters.
    length : float
        Road axis arclength in meters, at least 300.
    curvature : float
        Signed axis curvature in 1/m; positive bends left.  Must be 0
        for straight maps and nonzero with |curvature| <= 0.02 for
        curved maps.
    """
    if shape not in MAP_SHAPES:
        raise ConfigurationError(f"unknown map shape '{shape}'")
    if n_lanes < 2:
        raise ConfigurationError(f"need at least 2 lanes, got {n_lanes}")
    if lane_width <= 0.0:
        raise ConfigurationError("lane_width must be positive")
    if length < MIN_MAP_LENGTH:
        raise ConfigurationError(
            f"map length {length} m below the {MIN_MAP_LENGTH} m minimum"
        )
    if shape == "straight":
        if curvature != 0.0:
            raise ConfigurationError("straight maps require curvature 0")
    else:
        if curvature == 0.0:
            raise ConfigurationError("curved maps require nonzero curvature")
        if abs(curvature) > MAX_CURVATURE:
            raise ConfigurationError(
                f"|curvature| {abs(curvature)} exceeds {MAX_CURVATURE} 1/m"
            )

    offsets = [((n_lanes - 1) / 2.0 - i) * lane_width for i in range(n_lanes)]
    n_steps = int(np.ceil(length / CENTERLINE_SPACING))

    lanes = []
    if shape == "straight":
        xs = np.linspace(0.0, length, n_steps + 1)
        for off in offsets:
            pts = np.column_stack([xs, np.full_like(xs, off)])
            lanes.append(ReferenceLine(pts))
    else:
        axis_radius = 1.0 / abs(curvature)
        phi = np.linspace(0.0, length / axis_radius, n_steps + 1)
        for off in offsets:
            if curvature > 0.0:
                radius = axis_radius - off
                centre = np.array([0.0, axis_radius])
                pts = centre + radius * np.column_stack([np.sin(phi), -np.cos(phi)])
            else:
                radius = axis_radius + off
                centre = np.array([0.0, -axis_radius])
                pts = centre + radius * np.column_stack([np.sin(phi), np.cos(phi)])
            if radius < 1.0:
                raise ConfigurationError(
                    "lane radius collapses; fewer lanes or gentler curvature needed"
                )
            lanes.append(ReferenceLine(pts))

    return LaneMap(
        shape=shape,
        n_lanes=n_lanes,
        lane_width=float(lane_width),
        curvature=float(curvature),
        length=float(length),
        lanes=tuple(lanes),
    )


@dataclass(frozen=True)
class Actor:
    """A vehicle taking part in a scenario."""

    id: str
    role: str
    lane_index: int
    length: float = VEHICLE_LENGTH
    width: float = VEHICLE_WIDTH
    wheelbase: float = WHEELBASE

    def __post_init__(self):
        if self.role not in (ROLE_EGO, ROLE_ADVERSARIAL, ROLE_OTHER):
            raise ConfigurationError(f"unknown actor role '{self.role}'")


@dataclass(frozen=True)
class Trajectory:
    """Per-tick kinematic state of one actor.

    All arrays share one length: positions ``x``/``y`` in meters,
    speed ``v`` (m/s), acceleration ``a`` (m/s^2), steering angle
    ``delta`` (rad), and heading ``psi`` (rad).
    """

    x: np.ndarray
    y: np.ndarray
    v: np.ndarray
    a: np.ndarray
    delta: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        arrays = {}
        n = len(self.x)
        for name in ("x", "y", "v", "a", "delta", "psi"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            if arr.ndim != 1 or len(arr) != n:
                raise InconsistencyError("trajectory arrays must share one length")
            arr.flags.writeable = False
            arrays[name] = arr
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)

    def __len__(self):
        return len(self.x)

    @property
    def xy(self):
        return np.column_stack([self.x, self.y])


def derive_kinematics(xy, dt, wheelbase=WHEELBASE):
    """Derive speed, acceleration, heading and steering from positions.

    Finite differences with the last value repeated so every signal has
    the same length as the input.  Headings come from displacement
    directions and are held through standstill stretches (displacement
    below 1e-4 m); a trajectory that never moves keeps heading 0.
    Steering uses a discrete bicycle-model inversion,
    ``atan(wheelbase * dpsi / max(v * dt, 0.01))``.

    Parameters
    ----------
    xy : array of shape (N, 2)
        Positions over time, N >= 3.
    dt : float
        Tick duration in seconds.
    wheelbase : float
        Bicycle-model wheelbase in meters.
    """
    xy = np.asarray(xy, dtype=float)
    if xy.ndim != 2 or xy.shape[1] != 2:
        raise InsufficientDataError("positions must have shape (N, 2)")
    n = xy.shape[0]
    if n < 3:
        raise InsufficientDataError(f"need at least 3 position samples, got {n}")

    diffs = np.diff(xy, axis=0)
    step = np.hypot(diffs[:, 0], diffs[:, 1])

    v = np.empty(n)
    v[:-1] = step / dt
    v[-1] = v[-2]

    a = np.empty(n)
    a[:-1] = np.diff(v) / dt
    a[-1] = a[-2]

    psi = np.zeros(n)
    moving = step >= HEADING_HOLD_DISPLACEMENT
    if moving.any():
        raw = np.arctan2(diffs[:, 1], diffs[:, 0])
        last_valid = np.where(moving, np.arange(n - 1), -1)
        np.maximum.accumulate(last_valid, out=last_valid)
        first = int(np.argmax(moving))
        last_valid[last_valid < 0] = first
        psi[:-1] = raw[last_valid]
        psi[-1] = psi[-2]

    dpsi = wrap_angle(np.diff(psi))
    delta = np.empty(n)
    delta[:-1] = np.arctan(wheelbase * dpsi / np.maximum(v[:-1] * dt, STEER_SPEED_FLOOR))
    delta[-1] = delta[-2]

    return Trajectory(x=xy[:, 0], y=xy[:, 1], v=v, a=a, delta=delta, psi=psi)


def footprint_corners(x, y, psi, length=VEHICLE_LENGTH, width=VEHICLE_WIDTH):
    """Corners of oriented rectangle footprints, shape (N, 4, 2)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    psi = np.atleast_1d(np.asarray(psi, dtype=float))
    half = np.array(
        [
            [length / 2.0, width / 2.0],
            [-length / 2.0, width / 2.0],
            [-length / 2.0, -width / 2.0],
            [length / 2.0, -width / 2.0],
        ]
    )
    c, s = np.cos(psi), np.sin(psi)
    rot = np.empty((len(psi), 2, 2))
    rot[:, 0, 0] = c
    rot[:, 0, 1] = -s
    rot[:, 1, 0] = s
    rot[:, 1, 1] = c
    rotated = np.einsum("nij,kj->nki", rot, half)
    return rotated + np.stack([x, y], axis=-1)[:, None, :]


def _points_to_edges(points, starts, vecs):
    """Min distance from each point set to each edge set, per tick."""
    w = points[:, :, None, :] - starts[:, None, :, :]
    vv = np.sum(vecs * vecs, axis=-1)[:, None, :]
    t = np.clip(np.sum(w * vecs[:, None, :, :], axis=-1) / vv, 0.0, 1.0)
    closest = starts[:, None, :, :] + t[..., None] * vecs[:, None, :, :]
    delta = points[:, :, None, :] - closest
    return np.sqrt(np.sum(delta * delta, axis=-1)).min(axis=(1, 2))


def _rectangles_overlap(corners_a, corners_b):
    """Separating-axis overlap test for convex quads, per tick."""
    axes = []
    for corners in (corners_a, corners_b):
        for k in range(2):
            edge = corners[:, k + 1, :] - corners[:, k, :]
            normal = np.stack([-edge[:, 1], edge[:, 0]], axis=-1)
            norm = np.linalg.norm(normal, axis=-1, keepdims=True)
            axes.append(normal / np.maximum(norm, 1e-12))
    separated = np.zeros(corners_a.shape[0], dtype=bool)
    for axis in axes:
        proj_a = np.einsum("nkj,nj->nk", corners_a, axis)
        proj_b = np.einsum("nkj,nj->nk", corners_b, axis)
        separated |= proj_a.max(axis=1) < proj_b.min(axis=1)
        separated |= proj_b.max(axis=1) < proj_a.min(axis=1)
    return ~separated


def rectangle_clearance(corners_a, corners_b):
    """Clearance between two oriented rectangles per tick; 0 on overlap."""
    d_ab = _points_to_edges(corners_a, corners_b, np.roll(corners_b, -1, axis=1) - corners_b)
    d_ba = _points_to_edges(corners_b, corners_a, np.roll(corners_a, -1, axis=1) - corners_a)
    clearance = np.minimum(d_ab, d_ba)
    clearance[_rectangles_overlap(corners_a, corners_b)] = 0.0
    return clearance


def min_distance(traj_a, traj_b, size_a=(VEHICLE_LENGTH, VEHICLE_WIDTH),
                 size_b=(VEHICLE_LENGTH, VEHICLE_WIDTH)):
    """Minimum footprint clearance between two actors over time.

    Returns ``(distance, tick)`` where distance is the rectangle
    clearance (0 when overlapping) and tick is the earliest time index
    attaining it.
    """
    if len(traj_a) != len(traj_b):
        raise InconsistencyError("trajectories differ in length")
    ca = footprint_corners(traj_a.x, traj_a.y, traj_a.psi, *size_a)
    cb = footprint_corners(traj_b.x, traj_b.y, traj_b.psi, *size_b)
    clearance = rectangle_clearance(ca, cb)
    k = int(np.argmin(clearance))
    return float(clearance[k]), k


def relative_heading_at(traj_a, traj_b, k):
    """Absolute wrapped heading difference at one tick, in [0, pi]."""
    return float(np.abs(wrap_angle(traj_a.psi[k] - traj_b.psi[k])))


@dataclass(frozen=True)
class Scenario:
    """A fully simulated scenario: map, actors, and their trajectories."""

    lane_map: LaneMap
    actors: tuple
    trajectories: dict
    dt: float
    horizon: float
    curve: object = None

    def actor_by_role(self, role):
        matches = [a for a in self.actors if a.role == role]
        if len(matches) != 1:
            raise InconsistencyError(
                f"expected exactly one '{role}' actor, found {len(matches)}"
            )
        return matches[0]

    def others(self):
        return [a for a in self.actors if a.role == ROLE_OTHER]

    def actor_order(self):
        """Canonical actor ordering: ego, adversarial, others by id."""
        ego = [a for a in self.actors if a.role == ROLE_EGO]
        adv = [a for a in self.actors if a.role == ROLE_ADVERSARIAL]
        rest = sorted(self.others(), key=lambda a: a.id)
        return ego + adv + rest


def extract_observation(scenario):
    """Stack per-actor signals into the (N_t, 5 M) observation matrix.

    Actors appear ego first, adversarial second, then others by id;
    each contributes the columns (x, y, v, a, delta) in SI units.
    """
    order = scenario.actor_order()
    lengths = {len(scenario.trajectories[actor.id]) for actor in order}
    if len(lengths) != 1:
        raise InconsistencyError(f"trajectory lengths differ: {sorted(lengths)}")
    blocks = []
    for actor in order:
        traj = scenario.trajectories[actor.id]
        blocks.append(np.column_stack([traj.x, traj.y, traj.v, traj.a, traj.delta]))
    return np.hstack(blocks)
