"""Replay storage and hindsight relabeling.

Relabeled copies keep references to the original observation arrays, so
the extra memory cost of hindsight augmentation is a handful of small
goal tuples per transition rather than duplicated scenario sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import ConfigurationError
from ..goals import compute_reward, goal_from_achieved


@dataclass(frozen=True)
class Transition:
    """One perturbation step as the agent saw it.

    ``achieved`` describes the scenario produced by the action (the
    next observation); ``achieved_before`` the scenario the action was
    chosen in, which the state representation needs.
    """

    obs: np.ndarray
    achieved_before: object
    action: np.ndarray
    reward: float
    next_obs: np.ndarray
    achieved: object
    goal: object
    done: bool


class ReplayBuffer:
    """Uniform-sampling transition store with first-in-first-out eviction.

    Implemented as a ring so that both eviction and random access stay
    constant-time at any fill level.
    """

    def __init__(self, capacity):
        if capacity < 1:
            raise ConfigurationError("replay capacity must be at least 1")
        self.capacity = int(capacity)
        self._data = []
        self._write = 0

    def __len__(self):
        return len(self._data)

    def extend(self, transitions):
        for transition in transitions:
            if len(self._data) < self.capacity:
                self._data.append(transition)
            else:
                self._data[self._write] = transition
                self._write = (self._write + 1) % self.capacity

    def sample(self, batch_size, rng):
        if len(self._data) < batch_size:
            raise ConfigurationError(
                f"buffer holds {len(self._data)} transitions, need {batch_size}"
            )
        idx = rng.integers(len(self._data), size=batch_size)
        return [self._data[i] for i in idx]


def her_relabel(episode, rng, k=4, epsilon=0.1):
    """Augment an episode with future-achieved-goal relabels.

    Every transition is returned unchanged, followed by up to ``k``
    copies whose desired goal is replaced by the achieved goal of a
    transition drawn uniformly from the strictly later part of the same
    episode, with the reward recomputed under the substituted goal.
    The final transition has no future and contributes no copies.
    """
    if k < 0:
        raise ConfigurationError("k must be non-negative")
    augmented = []
    n = len(episode)
    for t, transition in enumerate(episode):
        augmented.append(transition)
        n_future = n - 1 - t
        if n_future == 0 or k == 0:
            continue
        picks = rng.integers(t + 1, n, size=k)
        for t_future in picks:
            substitute = goal_from_achieved(
                transition.goal, episode[t_future].achieved
            )
            reward, success = compute_reward(
                transition.achieved, substitute, epsilon
            )
            augmented.append(
                replace(
                    transition,
                    goal=substitute,
                    reward=reward,
                    done=success or transition.done,
                )
            )
    return augmented
