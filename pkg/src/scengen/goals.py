"""Constraint-based goals and the sparse goal-conditioned reward.

A goal bundles equality constraints (scenario quantities to hit within
a tolerance) and directional inequality constraints (bounds the
realized quantities must respect).  Quantities are drawn from a small
registered catalog of scenario-to-scalar mappings; success means the
equality vector lands within ``epsilon`` (Euclidean) of its targets
while every inequality holds strictly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ConfigurationError, InconsistencyError
from .world import ROLE_ADVERSARIAL, ROLE_EGO, min_distance, relative_heading_at

DEFAULT_EPSILON = 0.1

ENV_KINDS = ("deceleration", "cut_in", "cut_out")


def _ego_adv_pair(scenario):
    ego = scenario.actor_by_role(ROLE_EGO)
    adv = scenario.actor_by_role(ROLE_ADVERSARIAL)
    return scenario.trajectories[ego.id], scenario.trajectories[adv.id]


def _ego_adv_min_distance(scenario):
    return min_distance(*_ego_adv_pair(scenario))[0]


def _ego_other_min_distance(scenario):
    others = scenario.others()
    if not others:
        raise ConfigurationError(
            "ego_other_min_distance needs at least one non-adversarial vehicle"
        )
    ego = scenario.trajectories[scenario.actor_by_role(ROLE_EGO).id]
    return min(
        min_distance(ego, scenario.trajectories[o.id])[0] for o in others
    )


def _adv_max_abs_accel(scenario):
    adv = scenario.actor_by_role(ROLE_ADVERSARIAL)
    return float(np.max(np.abs(scenario.trajectories[adv.id].a)))


def _adv_max_abs_steer(scenario):
    adv = scenario.actor_by_role(ROLE_ADVERSARIAL)
    return float(np.max(np.abs(scenario.trajectories[adv.id].delta)))


def _ego_adv_heading_at_min_distance(scenario):
    ego_traj, adv_traj = _ego_adv_pair(scenario)
    _, k = min_distance(ego_traj, adv_traj)
    return relative_heading_at(ego_traj, adv_traj, k)


def _adv_others_min_distance(scenario):
    others = scenario.others()
    if not others:
        raise ConfigurationError(
            "adv_others_min_distance needs at least one non-adversarial vehicle"
        )
    adv = scenario.trajectories[scenario.actor_by_role(ROLE_ADVERSARIAL).id]
    return min(
        min_distance(adv, scenario.trajectories[o.id])[0] for o in others
    )


QUANTITIES = {
    "ego_adv_min_distance": _ego_adv_min_distance,
    "ego_other_min_distance": _ego_other_min_distance,
    "adv_max_abs_accel": _adv_max_abs_accel,
    "adv_max_abs_steer": _adv_max_abs_steer,
    "ego_adv_heading_at_min_distance": _ego_adv_heading_at_min_distance,
    "adv_others_min_distance": _adv_others_min_distance,
}


@dataclass(frozen=True)
class Constraint:
    """One named constraint: an equality target or a directional bound."""

    quantity: str
    kind: str            # "eq" or "ieq"
    target: float
    direction: str       # "upper" / "lower" for ieq, "none" for eq
    unit: str

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise ConfigurationError(f"unregistered quantity '{self.quantity}'")
        if self.kind not in ("eq", "ieq"):
            raise ConfigurationError(f"constraint kind must be eq or ieq, got '{self.kind}'")
        if self.kind == "ieq" and self.direction not in ("upper", "lower"):
            raise ConfigurationError(
                f"inequality '{self.quantity}' needs direction upper or lower"
            )


@dataclass(frozen=True)
class Goal:
    """Desired scenario properties: equality targets plus inequality bounds."""

    eq: tuple
    ieq: tuple

    def __post_init__(self):
        if len(self.eq) < 1:
            raise ConfigurationError("a goal needs at least one equality constraint")
        for c in self.eq:
            if c.kind != "eq":
                raise ConfigurationError("eq slot holds a non-equality constraint")
        for c in self.ieq:
            if c.kind != "ieq":
                raise ConfigurationError("ieq slot holds a non-inequality constraint")

    def as_vector(self):
        """Targets then bounds, in declaration order."""
        return np.array([c.target for c in self.eq] + [c.target for c in self.ieq])


@dataclass(frozen=True)
class AchievedGoal:
    """Quantity values realized by a simulated scenario, goal-aligned."""

    eq: tuple
    ieq: tuple

    def as_vector(self):
        return np.array(list(self.eq) + list(self.ieq))


def evaluate_goal_quantities(scenario, goal):
    """Measure a scenario against a goal template.

    Each named quantity is computed once even when it appears in
    several constraints.
    """
    cache = {}

    def value(name):
        if name not in cache:
            cache[name] = float(QUANTITIES[name](scenario))
        return cache[name]

    return AchievedGoal(
        eq=tuple(value(c.quantity) for c in goal.eq),
        ieq=tuple(value(c.quantity) for c in goal.ieq),
    )


def compute_reward(achieved, desired, epsilon=DEFAULT_EPSILON):
    """Sparse reward: 0 on success, -1 otherwise, plus the success flag.

    Success requires the equality vector within ``epsilon`` of its
    targets (Euclidean) and every inequality to hold strictly
    (upper: value < bound, lower: value > bound).
    """
    if len(achieved.eq) != len(desired.eq) or len(achieved.ieq) != len(desired.ieq):
        raise InconsistencyError("achieved and desired goals differ in shape")
    eq_err = np.linalg.norm(
        np.asarray(achieved.eq) - np.array([c.target for c in desired.eq])
    )
    ieq_ok = True
    for value, constraint in zip(achieved.ieq, desired.ieq):
        if constraint.direction == "upper":
            ieq_ok &= value < constraint.target
        else:
            ieq_ok &= value > constraint.target
    success = bool(eq_err < epsilon and ieq_ok)
    return (0.0 if success else -1.0), success


def goal_from_achieved(template, achieved):
    """Build the hindsight goal: the template with achieved values as targets."""
    eq = tuple(
        Constraint(c.quantity, c.kind, float(v), c.direction, c.unit)
        for c, v in zip(template.eq, achieved.eq)
    )
    ieq = tuple(
        Constraint(c.quantity, c.kind, float(v), c.direction, c.unit)
        for c, v in zip(template.ieq, achieved.ieq)
    )
    return Goal(eq=eq, ieq=ieq)


def sample_goal(kind, rng):
    """Draw a training goal for one environment family.

    The equality target is a clearance anywhere between contact and
    20 m, so the policy learns to dial in a requested severity rather
    than to always crash; inequality bounds are drawn uniformly from
    ranges bracketing the evaluation presets.
    """
    if kind not in ENV_KINDS:
        raise ConfigurationError(f"unknown environment kind '{kind}'")
    eq_quantity = "ego_other_min_distance" if kind == "cut_out" else "ego_adv_min_distance"
    eq = (Constraint(eq_quantity, "eq", float(rng.uniform(0.0, 20.0)), "none", "m"),)
    ieq = [
        Constraint("adv_max_abs_accel", "ieq", float(rng.uniform(4.0, 10.0)),
                   "upper", "m/s^2"),
        Constraint("adv_max_abs_steer", "ieq", float(rng.uniform(0.3, 0.9)),
                   "upper", "rad"),
    ]
    if kind == "cut_in":
        ieq.append(
            Constraint("ego_adv_heading_at_min_distance", "ieq",
                       float(rng.uniform(0.3, 0.7)), "upper", "rad")
        )
    if kind == "cut_out":
        ieq.append(
            Constraint("adv_others_min_distance", "ieq",
                       float(rng.uniform(0.1, 0.5)), "lower", "m")
        )
    return Goal(eq=eq, ieq=tuple(ieq))


def parse_goal(text):
    """Parse goal file text: a JSON list of constraint entries."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"goal file is not valid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise ConfigurationError("goal file must hold a JSON list of constraints")
    eq, ieq = [], []
    for entry in doc:
        for key in ("quantity", "type", "target", "direction", "unit"):
            if key not in entry:
                raise ConfigurationError(f"goal entry is missing '{key}'")
        constraint = Constraint(
            quantity=str(entry["quantity"]),
            kind=str(entry["type"]),
            target=float(entry["target"]),
            direction=str(entry["direction"]),
            unit=str(entry["unit"]),
        )
        (eq if constraint.kind == "eq" else ieq).append(constraint)
    return Goal(eq=tuple(eq), ieq=tuple(ieq))


def dump_goal(goal):
    """Serialize a goal to its file format."""
    entries = [
        {
            "quantity": c.quantity,
            "type": c.kind,
            "target": c.target,
            "direction": c.direction,
            "unit": c.unit,
        }
        for c in goal.eq + goal.ieq
    ]
    return json.dumps(entries, indent=2) + "\n"


def load_goal(path):
    """Read a goal file from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_goal(fh.read())


def load_preset(kind):
    """Load one of the bundled evaluation goals."""
    if kind not in ENV_KINDS:
        raise ConfigurationError(f"unknown environment kind '{kind}'")
    text = resources.files("scengen.presets").joinpath(f"{kind}.goal").read_text()
    return parse_goal(text)
