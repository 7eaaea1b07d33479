"""Goal-conditioned scenario perturbation environments.

An episode starts from a sampled initial traffic layout in which the
adversary follows a constant-velocity curve along its lane.  Each step
nudges the control points and weights of that curve and replays the
whole scenario: the adversary tracks its curve open-loop while the ego
vehicle reacts tick by tick through the car-following controller, and
every other vehicle keeps its predetermined trajectory.  The sparse
reward compares the realized scenario quantities against the episode's
goal; the episode ends on success or after ``t_max`` perturbations.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, InconsistencyError
from .goals import (
    ENV_KINDS,
    compute_reward,
    evaluate_goal_quantities,
    load_preset,
    sample_goal,
)
from .idm import IdmParams, ego_step
from .nurbs import (
    WEIGHT_FLOOR,
    NurbsCurve,
    basis_matrix,
    build_knot_vector,
    greville_abscissae,
)
from .world import (
    ROLE_ADVERSARIAL,
    ROLE_EGO,
    ROLE_OTHER,
    Actor,
    Scenario,
    Trajectory,
    derive_kinematics,
    extract_observation,
    generate_map,
)

WEIGHT_CAP = 10.0
MAX_RESAMPLE_TRIES = 20
# clearance kept between any sampled start position and the map end
PLACEMENT_MARGIN = 5.0


@dataclass(frozen=True)
class EnvConfig:
    """Static description of one environment family.

    The action scaling maxima bound how far a single step can move one
    control point longitudinally/laterally and how much it can change
    one weight.  Initial-layout ranges are (low, high) pairs drawn
    uniformly per episode.
    """

    kind: str
    t_max: int = 200
    horizon: float = 10.0
    dt: float = 0.1
    n_cp: int = 5
    degree: int = 3
    ds_max: float = 5.0
    dd_max: float = 0.5
    dw_max: float = 0.1
    gamma: float = 0.95
    epsilon: float = 0.1
    map_shape: str = "straight"
    n_lanes: int = 2
    lane_width: float = 3.5
    map_length: float = 500.0
    curvature: float = 0.0
    ego_speed: tuple = (10.0, 15.0)
    ego_start: float = 30.0
    adv_gap: tuple = (20.0, 40.0)
    cut_in_offset: tuple = (0.0, 60.0)
    other_gap: tuple = (20.0, 60.0)
    fixed_goal: bool = False

    def __post_init__(self):
        if self.kind not in ENV_KINDS:
            raise ConfigurationError(f"unknown environment kind '{self.kind}'")
        if self.t_max < 1:
            raise ConfigurationError("t_max must be at least 1")
        if self.horizon <= 0.0 or self.dt <= 0.0:
            raise ConfigurationError("horizon and dt must be positive")
        if self.n_cp < self.degree + 1:
            raise ConfigurationError(
                f"degree {self.degree} needs at least {self.degree + 1} control points"
            )
        for name in ("ds_max", "dd_max", "dw_max"):
            if getattr(self, name) <= 0.0:
                raise ConfigurationError(f"{name} must be positive")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigurationError("gamma must lie in (0, 1]")
        if self.epsilon <= 0.0:
            raise ConfigurationError("epsilon must be positive")
        for name in ("ego_speed", "adv_gap", "cut_in_offset", "other_gap"):
            lo, hi = getattr(self, name)
            if lo < 0.0 or hi < lo:
                raise ConfigurationError(f"{name} range must satisfy 0 <= low <= high")
        if self.ego_start < 0.0:
            raise ConfigurationError("ego_start must be non-negative")

    @property
    def n_ticks(self):
        return int(round(self.horizon / self.dt)) + 1

    @property
    def action_dim(self):
        return 3 * self.n_cp


@dataclass(frozen=True)
class OtherVehicle:
    """Analytic motion of a non-adversarial, non-ego actor."""

    actor_id: str
    lane_index: int
    s0: float
    v0: float


@dataclass(frozen=True, eq=False)
class EnvState:
    """Everything one episode carries between perturbation steps."""

    curve: NurbsCurve
    goal: object
    step: int
    done: bool
    scenario: Scenario
    achieved: object
    actors: tuple
    ego_lane: int
    adv_lane: int
    ego_s0: float
    ego_v0: float
    others: tuple
    other_trajs: dict


class GenerationEnv:
    """Perturb one adversary trajectory until the scenario goal holds."""

    def __init__(self, config, idm=None):
        self.config = config
        self.idm = idm if idm is not None else IdmParams()
        self.lane_map = generate_map(
            config.map_shape,
            n_lanes=config.n_lanes,
            lane_width=config.lane_width,
            length=config.map_length,
            curvature=config.curvature,
        )
        reach = config.ego_start + self.idm.v0 * config.horizon + PLACEMENT_MARGIN
        if reach > config.map_length:
            raise ConfigurationError(
                f"map length {config.map_length} cannot contain the ego's "
                f"horizon travel of up to {reach:.1f} m"
            )
        self.n_ticks = config.n_ticks
        self._knots = build_knot_vector(config.n_cp, config.degree)
        lo = float(self._knots[config.degree])
        hi = float(self._knots[-config.degree - 1])
        self._basis = basis_matrix(
            np.linspace(lo, hi, self.n_ticks), config.degree, self._knots
        )
        self._greville = greville_abscissae(config.degree, self._knots)

    @property
    def n_actors(self):
        return 3 if self.config.kind == "cut_out" else 2

    @property
    def goal_dim(self):
        return len(load_preset(self.config.kind).as_vector())

    # -- episode setup -------------------------------------------------

    def reset(self, rng, goal=None):
        """Sample a fresh initial layout and simulate its first rollout."""
        cfg = self.config
        for _ in range(MAX_RESAMPLE_TRIES):
            draw = self._draw_layout(rng)
            if draw is not None:
                break
        else:
            raise ConfigurationError(
                "could not place the actors on the map; the sampled offsets "
                f"kept exceeding its length ({cfg.map_length} m)"
            )
        ego_lane, adv_lane, ego_v, adv_s0, others = draw
        if goal is None:
            goal = load_preset(cfg.kind) if cfg.fixed_goal else sample_goal(cfg.kind, rng)
        actors = [
            Actor(id="ego", role=ROLE_EGO, lane_index=ego_lane),
            Actor(id="adv", role=ROLE_ADVERSARIAL, lane_index=adv_lane),
        ]
        for other in others:
            actors.append(Actor(id=other.actor_id, role=ROLE_OTHER,
                                lane_index=other.lane_index))
        other_trajs = {
            other.actor_id: self._lane_follower(other.lane_index, other.s0, other.v0)
            for other in others
        }
        state = EnvState(
            curve=self._initial_curve(adv_s0, ego_v),
            goal=goal,
            step=0,
            done=False,
            scenario=None,
            achieved=None,
            actors=tuple(actors),
            ego_lane=ego_lane,
            adv_lane=adv_lane,
            ego_s0=cfg.ego_start,
            ego_v0=ego_v,
            others=others,
            other_trajs=other_trajs,
        )
        scenario = self._simulate(state, state.curve)
        achieved = evaluate_goal_quantities(scenario, goal)
        return replace(state, scenario=scenario, achieved=achieved)

    def _draw_layout(self, rng):
        """One layout draw; None when an offset falls off the map."""
        cfg = self.config
        ego_v = float(rng.uniform(*cfg.ego_speed))
        ego_lane = int(rng.integers(cfg.n_lanes))
        if cfg.kind == "cut_in":
            sides = [lane for lane in (ego_lane - 1, ego_lane + 1)
                     if 0 <= lane < cfg.n_lanes]
            adv_lane = sides[int(rng.integers(len(sides)))]
            adv_s0 = cfg.ego_start + float(rng.uniform(*cfg.cut_in_offset))
        else:
            adv_lane = ego_lane
            adv_s0 = cfg.ego_start + float(rng.uniform(*cfg.adv_gap))
        others = ()
        if cfg.kind == "cut_out":
            npc_s0 = adv_s0 + float(rng.uniform(*cfg.other_gap))
            others = (OtherVehicle("npc0", ego_lane, npc_s0, 0.0),)
            if npc_s0 > cfg.map_length - PLACEMENT_MARGIN:
                return None
        adv_end = adv_s0 + ego_v * cfg.horizon
        if adv_end > cfg.map_length - PLACEMENT_MARGIN:
            return None
        return ego_lane, adv_lane, ego_v, adv_s0, others

    def _initial_curve(self, adv_s0, speed):
        """Constant-velocity lane following encoded exactly by the curve."""
        s = adv_s0 + speed * self.config.horizon * self._greville
        points = np.column_stack([s, np.zeros_like(s)])
        return NurbsCurve(points, np.ones(len(s)), self.config.degree, self._knots)

    def _lane_follower(self, lane_index, s0, speed):
        lane = self.lane_map.lanes[lane_index]
        n = self.n_ticks
        if speed <= 0.0:
            xy = np.repeat(lane.to_cartesian(s0, 0.0)[None, :], n, axis=0)
            zeros = np.zeros(n)
            return Trajectory(x=xy[:, 0], y=xy[:, 1], v=zeros, a=zeros,
                              delta=zeros, psi=np.full(n, lane.heading_at(s0)))
        t = np.arange(n) * self.config.dt
        xy = lane.to_cartesian_batch(s0 + speed * t, np.zeros(n))
        return derive_kinematics(xy, self.config.dt)

    # -- stepping ------------------------------------------------------

    def apply_action(self, state, action):
        """Shift control points and weights; keep the curve drivable.

        Out-of-range components are clipped to [-1, 1] before scaling.
        The longitudinal components are projected to be non-decreasing
        (a forward running maximum) so the adversary never reverses,
        then boxed to the lane; lateral components stay on the paved
        width plus half a meter of shoulder.
        """
        action = np.asarray(action, dtype=float)
        if action.shape != (self.config.action_dim,):
            raise ConfigurationError(
                f"action must have shape ({self.config.action_dim},), got {action.shape}"
            )
        if not np.all(np.isfinite(action)):
            raise ConfigurationError("action contains non-finite entries")
        parts = np.clip(action, -1.0, 1.0).reshape(3, self.config.n_cp)
        s = state.curve.control_points[:, 0] + self.config.ds_max * parts[0]
        d = state.curve.control_points[:, 1] + self.config.dd_max * parts[1]
        w = np.clip(state.curve.weights + self.config.dw_max * parts[2],
                    WEIGHT_FLOOR, WEIGHT_CAP)
        s = np.clip(np.maximum.accumulate(s), 0.0,
                    self.lane_map.lanes[state.adv_lane].length)
        d = np.clip(d, *self.lane_map.lateral_bounds(state.adv_lane, margin=0.5))
        return NurbsCurve(np.column_stack([s, d]), w, self.config.degree, self._knots)

    def step(self, state, action):
        """Apply one perturbation and replay the scenario.

        Returns (next state, reward, done, info); info carries the
        success flag and the headline scenario quantities.
        """
        if state.done:
            raise InconsistencyError("episode is already done; reset the environment")
        curve = self.apply_action(state, action)
        scenario = self._simulate(state, curve)
        achieved = evaluate_goal_quantities(scenario, state.goal)
        reward, success = compute_reward(achieved, state.goal, self.config.epsilon)
        step = state.step + 1
        done = success or step >= self.config.t_max
        adv = scenario.trajectories["adv"]
        info = {
            "success": success,
            "steps": step,
            "min_distance": achieved.eq[0],
            "max_accel": float(np.max(np.abs(adv.a))),
            "max_steer": float(np.max(np.abs(adv.delta))),
        }
        next_state = replace(state, curve=curve, scenario=scenario,
                             achieved=achieved, step=step, done=done)
        return next_state, reward, done, info

    def observation(self, state):
        """Sequence observation of the last simulated scenario."""
        return extract_observation(state.scenario)

    # -- scenario rollout ----------------------------------------------

    def _to_lane_frame(self, s, d, from_lane, to_lane):
        """Re-express lane coordinates in another lane's frame."""
        s = np.asarray(s, dtype=float)
        d = np.asarray(d, dtype=float)
        if from_lane == to_lane:
            return s, d
        shift = self.lane_map.lane_offset(from_lane) - self.lane_map.lane_offset(to_lane)
        r_from = self.lane_map.lane_radius(from_lane)
        if np.isinf(r_from):
            return s, d + shift
        ratio = self.lane_map.lane_radius(to_lane) / r_from
        return s * ratio, d + shift

    def _simulate(self, state, curve):
        """Replay the whole scenario for one adversary curve."""
        cfg = self.config
        n = self.n_ticks
        weighted = self._basis * curve.weights
        denom = weighted.sum(axis=1)
        sd = (weighted @ curve.control_points) / denom[:, None]
        adv_lane = self.lane_map.lanes[state.adv_lane]
        xy_adv = adv_lane.to_cartesian_batch(sd[:, 0], sd[:, 1])
        traj_adv = derive_kinematics(xy_adv, cfg.dt)

        tracks = []
        se, de = self._to_lane_frame(sd[:, 0], sd[:, 1], state.adv_lane, state.ego_lane)
        tracks.append((se, de, traj_adv.v))
        t = np.arange(n) * cfg.dt
        for other in state.others:
            se, de = self._to_lane_frame(other.s0 + other.v0 * t, np.zeros(n),
                                         other.lane_index, state.ego_lane)
            tracks.append((se, de, np.full(n, other.v0)))

        s_ego = np.empty(n)
        v_ego = np.empty(n)
        s_ego[0] = state.ego_s0
        v_ego[0] = state.ego_v0
        for k in range(n - 1):
            neighbors = [(track[0][k], track[1][k], track[2][k]) for track in tracks]
            s_ego[k + 1], v_ego[k + 1], _ = ego_step(
                s_ego[k], v_ego[k], neighbors, self.idm, cfg.dt, cfg.lane_width
            )
        ego_lane = self.lane_map.lanes[state.ego_lane]
        traj_ego = derive_kinematics(
            ego_lane.to_cartesian_batch(s_ego, np.zeros(n)), cfg.dt
        )

        trajectories = {"ego": traj_ego, "adv": traj_adv}
        trajectories.update(state.other_trajs)
        return Scenario(
            lane_map=self.lane_map,
            actors=state.actors,
            trajectories=trajectories,
            dt=cfg.dt,
            horizon=cfg.horizon,
            curve=curve,
        )


class EpisodeLog:
    """Append-only CSV of per-episode outcomes."""

    HEADER = "episode,steps,success,min_distance,max_accel,max_steer"

    def __init__(self, path):
        self.path = path
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.HEADER + "\n")

    def append(self, episode, steps, success, min_distance, max_accel, max_steer):
        row = (f"{episode},{steps},{int(success)},{min_distance:.9g},"
               f"{max_accel:.9g},{max_steer:.9g}")
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(row + "\n")
