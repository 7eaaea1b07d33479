"""Intelligent Driver Model: the black-box controller of the ego vehicle.

The ego keeps its lane perfectly and regulates speed with the IDM
car-following law (Treiber, Hennecke and Helbing, 2000).  The model is
deliberately naive about geometry: the gap it reacts to is the
center-to-center arclength distance to the nearest vehicle ahead inside
its lane corridor.  It reads only the current tick of the world and
never sees the adversary's future trajectory.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import ClampWarning, ConfigurationError

EMERGENCY_BRAKE = -9.81
# how far outside the lane half-width a vehicle may sit and still count
# as blocking the ego's corridor
CORRIDOR_MARGIN = 0.3


@dataclass(frozen=True)
class IdmParams:
    """IDM parameter set; defaults model an attentive highway driver."""

    v0: float = 15.0
    t_hw: float = 1.6
    a_max: float = 0.73
    b_comf: float = 1.67
    delta_exp: float = 4.0
    s0: float = 2.0

    def __post_init__(self):
        for name in ("v0", "t_hw", "a_max", "b_comf", "delta_exp", "s0"):
            if getattr(self, name) <= 0.0:
                raise ConfigurationError(f"IdmParams.{name} must be positive")
        if self.delta_exp < 1.0:
            raise ConfigurationError("acceleration exponent must be at least 1")


def idm_acceleration(v, v_lead, gap, params):
    """IDM acceleration for one vehicle state.

    Parameters
    ----------
    v : float
        Own speed, m/s.
    v_lead : float
        Leader speed, m/s; ignored on a free road.
    gap : float or None
        Center-to-center distance to the leader, m; None means free road.

    Returns
    -------
    float
        Acceleration clamped to [-9.81, a_max].  A non-positive gap
        yields the emergency value -9.81 and raises a ClampWarning,
        modeling braking that can no longer prevent contact.
    """
    free = 1.0 - (v / params.v0) ** params.delta_exp
    if gap is None:
        acc = params.a_max * free
    else:
        if gap <= 0.0:
            warnings.warn(
                f"non-positive gap {gap:.3f} m: emergency braking",
                ClampWarning,
                stacklevel=2,
            )
            return EMERGENCY_BRAKE
        s_star = params.s0 + v * params.t_hw + v * (v - v_lead) / (
            2.0 * math.sqrt(params.a_max * params.b_comf)
        )
        acc = params.a_max * (free - (s_star / gap) ** 2)
    return max(EMERGENCY_BRAKE, min(params.a_max, acc))


def select_leader(s_ego, neighbors, lane_width):
    """Pick the nearest vehicle ahead inside the ego's lane corridor.

    ``neighbors`` holds (s, d, v) triples already expressed in the ego
    lane frame.  Returns ``(gap, v_lead)`` or ``(None, 0.0)`` when the
    road ahead is free.
    """
    corridor = lane_width / 2.0 + CORRIDOR_MARGIN
    best_gap, best_v = None, 0.0
    for s, d, v in neighbors:
        if abs(d) >= corridor or s <= s_ego:
            continue
        gap = s - s_ego
        if best_gap is None or gap < best_gap:
            best_gap, best_v = gap, v
    return best_gap, best_v


def ego_step(s_ego, v_ego, neighbors, params, dt, lane_width):
    """Advance the ego one tick in its own lane frame.

    Semi-implicit update: acceleration from the current world state,
    velocity first (floored at 0), then position with the new velocity.

    Returns
    -------
    (s, v, acc) : tuple of floats
        Next arclength, next speed, and the applied acceleration.
    """
    gap, v_lead = select_leader(s_ego, neighbors, lane_width)
    acc = idm_acceleration(v_ego, v_lead, gap, params)
    v_next = max(0.0, v_ego + acc * dt)
    s_next = s_ego + v_next * dt
    return s_next, v_next, acc
