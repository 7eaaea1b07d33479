"""
Hands on the perturbation loop
==============================

One episode of the deceleration family, driven by hand instead of by a
policy.  Every step nudges the adversary's spline control points, the
world re-simulates, and the goal quantities move.  Run it from the
repository root:

    python demos/perturb_and_replay.py
"""

import numpy as np

from scengen.env import EnvConfig, GenerationEnv
from scengen.render import render_scenario
from scengen.scenario_io import save_scenario

rng = np.random.default_rng(7)

env = GenerationEnv(EnvConfig(kind="deceleration", fixed_goal=True))
state = env.reset(rng)

print("goal:")
for c in state.goal.eq + state.goal.ieq:
    print(f"  {c.quantity} {c.direction} {c.target} {c.unit}")

# action layout: five control points, each with a longitudinal pull, a
# lateral pull, and a weight change, all in [-1, 1].  Pulling the tail
# of the spline backwards makes the adversary brake in front of the ego.
brake = np.zeros(15)
brake[6] = -1.0
brake[9] = -1.0
brake[12] = -1.0

for step in range(8):
    state, reward, done, info = env.step(state, brake)
    gap = state.achieved.eq[0]
    print(f"step {step}: ego-adversary min distance {gap:6.2f} m, "
          f"reward {reward}, done {done}")
    if done:
        break

save_scenario(state.scenario, "demo_scenario.scn")
render_scenario(state.scenario, "demo_scenario.svg")
print("wrote demo_scenario.scn and demo_scenario.svg")
