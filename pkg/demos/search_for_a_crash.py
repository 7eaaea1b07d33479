"""Find a goal-satisfying scenario with the sampling search.

The cross-entropy search treats the whole episode as one flat decision
vector and needs no trained policy, which makes it the quickest way to
check that an environment's goal is reachable at all.  Takes a few
seconds on a laptop.
"""

import numpy as np

from scengen.agent import cem_search
from scengen.env import EnvConfig, GenerationEnv
from scengen.render import render_scenario

env = GenerationEnv(EnvConfig(kind="deceleration", fixed_goal=True))
rng = np.random.default_rng(3)
state = env.reset(rng)

result = cem_search(env, state, rng, budget=2000)

print(f"solved: {result.success} after {result.simulations} simulations")
print(f"best score: {result.best_score:.4f}")
for row in result.history:
    print(f"  iteration {row['iteration']}: best {row['best_score']:8.3f}, "
          f"proposal spread {row['mean_std']:.3f}")

names = [c.quantity for c in state.goal.eq + state.goal.ieq]
values = list(result.best_achieved.eq) + list(result.best_achieved.ieq)
targets = [c.target for c in state.goal.eq + state.goal.ieq]
print("achieved vs target:")
for name, value, target in zip(names, values, targets):
    print(f"  {name}: {value:.3f} (target {target})")

if result.success:
    render_scenario(result.best_scenario, "crash_found.svg")
    print("wrote crash_found.svg")
