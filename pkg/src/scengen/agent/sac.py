"""Soft actor-critic with dropout-regularized critics and hindsight replay.

The update math follows the standard formulation: twin critics trained
on entropy-regularized bootstrap targets, a squashed-Gaussian actor
updated against the critic minimum, and an entropy temperature adapted
toward a fixed target.  The scenario encoder receives gradients from
the critic loss only; the actor consumes detached features.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import asdict, dataclass, replace as dc_replace

import numpy as np
import torch

from ..errors import CheckpointError, ConfigurationError
from ..goals import load_preset
from .checkpoint import digest_config, load_checkpoint, save_checkpoint
from .networks import Actor, ScenarioEncoder, TwinCritic, polyak_update
from .replay import ReplayBuffer, Transition, her_relabel

VARIANTS = ("full", "droq", "sac")


@dataclass(frozen=True)
class AgentConfig:
    """Hyperparameters; the defaults are the full-scale training settings."""

    batch: int = 256
    lr: float = 3e-4
    gradient_steps: int = 4
    policy_delay: int = 2
    buffer_capacity: int = 1_000_000
    her: bool = True
    her_k: int = 4
    gamma: float = 0.95
    entropy_target: float = -15.0
    alpha_init: float = 1.0
    tau: float = 5e-3
    mlp_hidden: int = 256
    gru_hidden: int = 128
    dropout: float = 0.02
    layer_norm: bool = True
    encoder_stride: int = 1
    warmup_steps: int = 500
    eval_every: int = 1000
    eval_episodes: int = 20

    def __post_init__(self):
        positive = ("batch", "lr", "gradient_steps", "policy_delay",
                    "buffer_capacity", "alpha_init", "tau", "mlp_hidden",
                    "gru_hidden", "encoder_stride", "eval_every", "eval_episodes")
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"AgentConfig.{name} must be positive")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigurationError("gamma must lie in (0, 1]")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigurationError("dropout must lie in [0, 1)")
        if self.her_k < 0 or self.warmup_steps < 0:
            raise ConfigurationError("her_k and warmup_steps must be non-negative")


def variant_config(name, **overrides):
    """The three ablation arms differ only in these switches."""
    if name not in VARIANTS:
        raise ConfigurationError(f"unknown agent variant '{name}'")
    base = AgentConfig(**overrides)
    if name == "droq":
        return dc_replace(base, her=False)
    if name == "sac":
        return dc_replace(base, her=False, dropout=0.0, layer_norm=False,
                          gradient_steps=1)
    return base


class Agent:
    """Goal-conditioned policy with its critics and temperature."""

    def __init__(self, env, config, seed=0, dtype=torch.float32):
        self.config = config
        self.env_kind = env.config.kind
        self.n_actors = env.n_actors
        self.goal_dim = env.goal_dim
        self.action_dim = env.config.action_dim
        self.dtype = dtype
        torch.manual_seed(seed)
        z_dim = config.gru_hidden + 2 * self.goal_dim
        self.encoder = ScenarioEncoder(self.n_actors, config.gru_hidden,
                                       config.encoder_stride, dtype)
        self.actor = Actor(z_dim, self.action_dim, config.mlp_hidden, dtype)
        self.critic = TwinCritic(z_dim, self.action_dim, config.mlp_hidden,
                                 config.dropout, config.layer_norm, dtype)
        self.target = TwinCritic(z_dim, self.action_dim, config.mlp_hidden,
                                 config.dropout, config.layer_norm, dtype)
        self.target.load_state_dict(self.critic.state_dict())
        for p in self.target.parameters():
            p.requires_grad_(False)
        self.log_alpha = torch.tensor(math.log(config.alpha_init), dtype=dtype,
                                      requires_grad=True)
        self.critic_opt = torch.optim.Adam(
            list(self.critic.parameters()) + list(self.encoder.parameters()),
            lr=config.lr)
        self.actor_opt = torch.optim.Adam(self.actor.parameters(), lr=config.lr)
        self.alpha_opt = torch.optim.Adam([self.log_alpha], lr=config.lr)
        self.noise = torch.Generator().manual_seed(seed + 1)
        self._critic_updates = 0

    @property
    def alpha(self):
        return self.log_alpha.exp()

    # -- acting ----------------------------------------------------------

    def state_rep(self, obs, achieved_vec, desired_vec):
        feature = self.encoder(obs)
        return torch.cat([feature, achieved_vec, desired_vec], dim=-1)

    def select_action(self, obs, achieved, desired, deterministic=False):
        """Policy action for one observation, as a numpy vector."""
        obs_t = torch.as_tensor(np.asarray(obs, dtype=np.float32),
                                dtype=self.dtype).unsqueeze(0)
        ach = torch.as_tensor(achieved.as_vector(), dtype=self.dtype).unsqueeze(0)
        des = torch.as_tensor(desired.as_vector(), dtype=self.dtype).unsqueeze(0)
        with torch.no_grad():
            z = self.state_rep(obs_t, ach, des)
            if deterministic:
                action = self.actor.deterministic(z)
            else:
                action, _ = self.actor.sample(z, self.noise)
        return action.squeeze(0).numpy().astype(np.float64)

    # -- learning --------------------------------------------------------

    def _collate(self, batch):
        def to(arr):
            return torch.as_tensor(np.asarray(arr), dtype=self.dtype)

        obs = to(np.stack([tr.obs for tr in batch]))
        nxt = to(np.stack([tr.next_obs for tr in batch]))
        act = to(np.stack([tr.action for tr in batch]))
        rew = to(np.array([tr.reward for tr in batch]))
        done = to(np.array([1.0 if tr.done else 0.0 for tr in batch]))
        ach_b = to(np.stack([tr.achieved_before.as_vector() for tr in batch]))
        ach_n = to(np.stack([tr.achieved.as_vector() for tr in batch]))
        des = to(np.stack([tr.goal.as_vector() for tr in batch]))
        return obs, act, rew, nxt, ach_b, ach_n, des, done

    def update(self, buffer, rng):
        """One environment step's worth of gradient work."""
        cfg = self.config
        critic_losses, actor_losses = [], []
        for _ in range(cfg.gradient_steps):
            batch = buffer.sample(cfg.batch, rng)
            obs, act, rew, nxt, ach_b, ach_n, des, done = self._collate(batch)
            with torch.no_grad():
                z_next = self.state_rep(nxt, ach_n, des)
                a_next, logp_next = self.actor.sample(z_next, self.noise)
                q_next = self.target.minimum(z_next, a_next)
                y = rew + cfg.gamma * (1.0 - done) * (
                    q_next - self.alpha.detach() * logp_next)
            z = self.state_rep(obs, ach_b, des)
            q1, q2 = self.critic(z, act)
            critic_loss = torch.nn.functional.mse_loss(q1, y) \
                + torch.nn.functional.mse_loss(q2, y)
            self.critic_opt.zero_grad()
            critic_loss.backward()
            self.critic_opt.step()
            polyak_update(self.target, self.critic, cfg.tau)
            critic_losses.append(float(critic_loss.detach()))
            self._critic_updates += 1
            if self._critic_updates % cfg.policy_delay == 0:
                z_d = z.detach()
                a_pi, logp_pi = self.actor.sample(z_d, self.noise)
                q_pi = self.critic.minimum(z_d, a_pi)
                actor_loss = (self.alpha.detach() * logp_pi - q_pi).mean()
                self.actor_opt.zero_grad()
                actor_loss.backward()
                self.actor_opt.step()
                alpha_loss = -(self.log_alpha
                               * (logp_pi.detach() + cfg.entropy_target)).mean()
                self.alpha_opt.zero_grad()
                alpha_loss.backward()
                self.alpha_opt.step()
                actor_losses.append(float(actor_loss.detach()))
        return {
            "critic_loss": float(np.mean(critic_losses)),
            "actor_loss": float(np.mean(actor_losses)) if actor_losses else math.nan,
            "alpha": float(self.alpha.detach()),
        }

    # -- persistence -------------------------------------------------------

    def _modules(self):
        return {
            "encoder": self.encoder,
            "actor": self.actor,
            "critic": self.critic,
            "target": self.target,
        }

    def named_tensors(self):
        tensors = {}
        for prefix, module in self._modules().items():
            for name, value in module.state_dict().items():
                tensors[f"{prefix}.{name}"] = value.detach().cpu().numpy()
        tensors["log_alpha"] = self.log_alpha.detach().cpu().numpy().reshape(())
        return tensors

    def load_tensors(self, tensors):
        for prefix, module in self._modules().items():
            state = {}
            for name, value in module.state_dict().items():
                key = f"{prefix}.{name}"
                if key not in tensors:
                    raise CheckpointError(f"checkpoint is missing tensor '{key}'")
                if tuple(tensors[key].shape) != tuple(value.shape):
                    raise CheckpointError(
                        f"tensor '{key}' has shape {tensors[key].shape}, "
                        f"expected {tuple(value.shape)}"
                    )
                state[name] = torch.as_tensor(tensors[key], dtype=self.dtype)
            module.load_state_dict(state)
        if "log_alpha" not in tensors:
            raise CheckpointError("checkpoint is missing tensor 'log_alpha'")
        with torch.no_grad():
            self.log_alpha.copy_(torch.as_tensor(tensors["log_alpha"],
                                                 dtype=self.dtype))

    def config_digest(self):
        payload = dict(asdict(self.config))
        payload.update({"env_kind": self.env_kind, "n_actors": self.n_actors,
                        "goal_dim": self.goal_dim, "action_dim": self.action_dim})
        return digest_config(payload)

    def parameter_digest(self):
        """Order-stable hash over every parameter, for determinism checks."""
        tensors = self.named_tensors()
        sha = hashlib.sha256()
        for name in sorted(tensors):
            sha.update(name.encode())
            sha.update(np.ascontiguousarray(tensors[name], dtype="<f8").tobytes())
        return sha.hexdigest()

    def save(self, path, step, meta=None):
        save_checkpoint(path, self.named_tensors(), step,
                        self.config_digest(), meta)

    def load(self, path):
        manifest, tensors = load_checkpoint(path)
        if manifest["config_digest"] != self.config_digest():
            raise CheckpointError(
                "checkpoint was produced under a different configuration"
            )
        self.load_tensors(tensors)
        return manifest


def evaluate_policy(env, agent, episodes, seed):
    """Deterministic-mode rollouts; returns (success rate, mean length)."""
    rng = np.random.default_rng(seed)
    successes = 0
    lengths = []
    for _ in range(episodes):
        state = env.reset(rng)
        obs = env.observation(state)
        done = False
        while not done:
            action = agent.select_action(obs, state.achieved, state.goal,
                                         deterministic=True)
            state, _, done, info = env.step(state, action)
            obs = env.observation(state)
        successes += int(info["success"])
        lengths.append(info["steps"])
    return successes / episodes, float(np.mean(lengths))


METRICS_HEADER = "step,eval_success_rate,mean_episode_length,critic_loss,actor_loss,alpha"


def train(env, config, seeds, budget, out_dir=None, meta=None):
    """Run the training loop once per seed.

    Writes ``metrics_seed<k>.csv`` and ``checkpoint_seed<k>.ckpt`` under
    ``out_dir`` when given.  Returns {seed: success-rate curve}, where
    the curve holds one (step, success rate) pair per evaluation.
    """
    if not seeds:
        raise ConfigurationError("train needs at least one seed")
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    curves = {}
    for seed in seeds:
        metrics_path = None
        checkpoint_path = None
        if out_dir is not None:
            metrics_path = f"{out_dir}/metrics_seed{seed}.csv"
            checkpoint_path = f"{out_dir}/checkpoint_seed{seed}.ckpt"
        curves[seed] = _train_single(env, config, seed, budget,
                                     metrics_path, checkpoint_path, meta)
    return curves


def _train_single(env, config, seed, budget, metrics_path, checkpoint_path, meta):
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    agent = Agent(env, config, seed)
    buffer = ReplayBuffer(config.buffer_capacity)
    rows = []
    curve = []
    losses = {"critic_loss": math.nan, "actor_loss": math.nan,
              "alpha": config.alpha_init}
    state = env.reset(rng)
    obs = env.observation(state).astype(np.float32)
    episode = []
    for step in range(1, budget + 1):
        if step <= config.warmup_steps:
            action = rng.uniform(-1.0, 1.0, size=agent.action_dim)
        else:
            action = agent.select_action(obs, state.achieved, state.goal)
        next_state, reward, done, info = env.step(state, action)
        next_obs = env.observation(next_state).astype(np.float32)
        episode.append(Transition(
            obs=obs, achieved_before=state.achieved, action=action,
            reward=reward, next_obs=next_obs, achieved=next_state.achieved,
            goal=state.goal, done=done,
        ))
        state, obs = next_state, next_obs
        if done:
            if config.her:
                buffer.extend(her_relabel(episode, rng, config.her_k,
                                          env.config.epsilon))
            else:
                buffer.extend(episode)
            episode = []
            state = env.reset(rng)
            obs = env.observation(state).astype(np.float32)
        if step > config.warmup_steps and len(buffer) >= config.batch:
            losses = agent.update(buffer, rng)
        if step % config.eval_every == 0:
            rate, mean_len = evaluate_policy(env, agent, config.eval_episodes,
                                             seed * 100_000 + step)
            curve.append((step, rate))
            rows.append(f"{step},{rate:.4f},{mean_len:.2f},"
                        f"{losses['critic_loss']:.6g},{losses['actor_loss']:.6g},"
                        f"{losses['alpha']:.6g}")
    if episode:
        buffer.extend(episode)
    if metrics_path is not None:
        with open(metrics_path, "w", encoding="utf-8") as fh:
            fh.write(METRICS_HEADER + "\n")
            for row in rows:
                fh.write(row + "\n")
    if checkpoint_path is not None:
        agent.save(checkpoint_path, budget, meta)
    return curve
