"""Cross-entropy search over action sequences.

A derivative-free baseline that treats the whole episode as one
flattened action vector.  It doubles as a solvability oracle: if this
simple search can push a freshly sampled initial state to its goal
within a simulation budget, the environment is solvable without any
learning machinery.  Random search is the degenerate configuration
whose elite fraction is 1.0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError

# score penalty per violated inequality bound; large against eq errors,
# which are meters and start in the tens
VIOLATION_PENALTY = 100.0
STD_FLOOR = 0.10


def goal_score(achieved, goal):
    """Scalar badness: equality error plus a graded penalty per broken bound.

    A violated bound costs the flat penalty plus its shortfall in natural
    units, so the search can tell a near-miss from a deep violation even
    though both are infeasible.
    """
    eq_err = float(np.linalg.norm(
        np.asarray(achieved.eq) - np.array([c.target for c in goal.eq])))
    penalty = 0.0
    for value, constraint in zip(achieved.ieq, goal.ieq):
        if constraint.direction == "upper":
            shortfall = float(value) - constraint.target
        else:
            shortfall = constraint.target - float(value)
        if shortfall >= 0.0:
            penalty += VIOLATION_PENALTY + shortfall
    return eq_err + penalty


@dataclass
class CemResult:
    """Outcome of one search run."""

    success: bool
    simulations: int
    best_score: float
    best_actions: np.ndarray
    best_scenario: object
    best_achieved: object
    history: list


def cem_search(env, state0, rng, budget, population=25, elite_frac=0.1,
               sequence_len=20, init_std=1.0):
    """Search action sequences from a fixed initial state.

    Every environment step counts against ``budget``; the search stops
    early as soon as a candidate reaches the goal.  The best sequence
    found so far is re-injected into each later population, so the
    incumbent always competes against the fresh draws.
    """
    if budget < 1:
        raise ConfigurationError("budget must be at least 1 simulation")
    if population < 1 or not 0.0 < elite_frac <= 1.0:
        raise ConfigurationError("population must be >= 1 and elite_frac in (0, 1]")
    if state0.done:
        raise ConfigurationError("the initial state is already terminal")
    dim = sequence_len * env.config.action_dim
    mean = np.zeros(dim)
    std = np.full(dim, float(init_std))
    best = CemResult(success=False, simulations=0, best_score=np.inf,
                     best_actions=np.zeros((sequence_len, env.config.action_dim)),
                     best_scenario=state0.scenario, best_achieved=state0.achieved,
                     history=[])
    sims = 0
    iteration = 0
    while sims < budget:
        draws = np.clip(
            rng.normal(mean, std, size=(population, dim)), -1.0, 1.0)
        if iteration > 0 and np.isfinite(best.best_score):
            draws[0] = best.best_actions.ravel()
        scores = np.full(population, np.inf)
        for i, flat in enumerate(draws):
            actions = flat.reshape(sequence_len, env.config.action_dim)
            state = state0
            for row in actions:
                state, _, done, info = env.step(state, row)
                sims += 1
                score = goal_score(state.achieved, state.goal)
                scores[i] = min(scores[i], score)
                if score < best.best_score:
                    best.best_score = score
                    best.best_actions = actions.copy()
                    best.best_scenario = state.scenario
                    best.best_achieved = state.achieved
                if info["success"]:
                    best.success = True
                    best.simulations = sims
                    return best
                if done or sims >= budget:
                    break
            if sims >= budget:
                break
        evaluated = scores[np.isfinite(scores)]
        if evaluated.size:
            n_elite = max(1, int(round(elite_frac * evaluated.size)))
            order = np.argsort(scores)[:n_elite]
            elite = draws[order]
            mean = elite.mean(axis=0)
            std = np.maximum(elite.std(axis=0), STD_FLOOR)
        best.history.append({
            "iteration": iteration,
            "best_score": float(np.min(scores)),
            "mean_std": float(std.mean()),
        })
        iteration += 1
    best.simulations = sims
    return best
