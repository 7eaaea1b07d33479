"""
Smoke-scale training walkthrough
================================

The same loop the `scengen train` command runs, shrunk until it
finishes in about two minutes on one core.  Expect a policy that has
barely started learning; the point is to watch the plumbing end to
end, not to reproduce a result.
"""

import numpy as np

from scengen.agent import Agent, variant_config, train
from scengen.env import EnvConfig, GenerationEnv

# -- a shortened deceleration environment; episodes cap at 25 steps
env = GenerationEnv(EnvConfig(kind="deceleration", t_max=25,
                              ego_speed=(15.0, 15.0)))

# -- hindsight relabeling on, everything else desk sized
config = variant_config(
    "full",
    batch=32,
    gru_hidden=32,
    mlp_hidden=64,
    encoder_stride=5,
    buffer_capacity=20_000,
    warmup_steps=200,
    eval_every=500,
    eval_episodes=5,
)

curves = train(env, config, seeds=[0], budget=2000, out_dir="smoke_run")
print("evaluation curve (step, success rate):")
for step, rate in curves[0]:
    print(f"  {step:5d}  {rate:.2f}")

# -- reload the checkpoint and roll three deterministic episodes
agent = Agent(env, config, seed=0)
agent.load("smoke_run/checkpoint_seed0.ckpt")
rng = np.random.default_rng(42)
for episode in range(3):
    state = env.reset(rng)
    obs = env.observation(state)
    done = False
    while not done:
        action = agent.select_action(obs, state.achieved, state.goal,
                                     deterministic=True)
        state, _, done, info = env.step(state, action)
        obs = env.observation(state)
    closest = state.achieved.eq[0]
    print(f"episode {episode}: success {info['success']}, "
          f"{info['steps']} steps, closest approach {closest:.2f} m")
