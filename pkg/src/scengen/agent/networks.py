"""Network blocks: scenario encoder, squashed-Gaussian actor, twin critics.

The encoder consumes the raw observation sequence of a simulated
scenario, one tick per step, and summarizes it in its final hidden
state.  Inputs are normalized by fixed per-signal scales rather than
running statistics so that identical scenarios always produce identical
features.
"""

from __future__ import annotations

import math

import numpy as np
import torch
from torch import nn

from ..errors import ConfigurationError, NumericalError

# fixed normalization per actor block (x, y, v, a, delta)
SIGNAL_SCALES = (100.0, 100.0, 30.0, 10.0, 1.0)
LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0


class ScenarioEncoder(nn.Module):
    """Single-layer recurrent summary of an observation sequence."""

    def __init__(self, n_actors, hidden=128, stride=1, dtype=torch.float32):
        super().__init__()
        if n_actors < 1:
            raise ConfigurationError("encoder needs at least one actor block")
        if stride < 1:
            raise ConfigurationError("encoder stride must be at least 1")
        self.n_actors = n_actors
        self.stride = stride
        self.gru = nn.GRU(5 * n_actors, hidden, num_layers=1,
                          batch_first=True, dtype=dtype)
        scale = torch.tensor(SIGNAL_SCALES * n_actors, dtype=dtype)
        self.register_buffer("scale", scale)

    @property
    def feature_dim(self):
        return self.gru.hidden_size

    def forward(self, obs):
        """(B, N_t, 5M) observation batch -> (B, hidden) features."""
        if obs.ndim != 3 or obs.shape[-1] != 5 * self.n_actors:
            raise ConfigurationError(
                f"expected observation batch (B, N_t, {5 * self.n_actors}), "
                f"got {tuple(obs.shape)}"
            )
        x = obs[:, :: self.stride] / self.scale
        _, h = self.gru(x)
        return h[-1]


class Actor(nn.Module):
    """Squashed-Gaussian policy over the box action space."""

    def __init__(self, z_dim, action_dim, hidden=256, dtype=torch.float32):
        super().__init__()
        self.trunk = nn.Sequential(
            nn.Linear(z_dim, hidden, dtype=dtype),
            nn.ReLU(),
            nn.Linear(hidden, hidden, dtype=dtype),
            nn.ReLU(),
        )
        self.mean_head = nn.Linear(hidden, action_dim, dtype=dtype)
        self.log_std_head = nn.Linear(hidden, action_dim, dtype=dtype)

    def forward(self, z):
        h = self.trunk(z)
        mean = self.mean_head(h)
        log_std = torch.clamp(self.log_std_head(h), LOG_STD_MIN, LOG_STD_MAX)
        return mean, log_std

    def sample(self, z, generator=None):
        """Reparameterized sample with its squashing-corrected log-density."""
        mean, log_std = self(z)
        if not torch.isfinite(mean).all() or not torch.isfinite(log_std).all():
            raise NumericalError("actor produced non-finite distribution parameters")
        std = log_std.exp()
        eps = torch.randn(mean.shape, generator=generator,
                          dtype=mean.dtype, device=mean.device)
        pre_squash = mean + std * eps
        action = torch.tanh(pre_squash)
        log_prob = gaussian_log_prob(pre_squash, mean, log_std)
        log_prob = log_prob - tanh_log_det(pre_squash)
        return action, log_prob.sum(dim=-1)

    def deterministic(self, z):
        mean, _ = self(z)
        return torch.tanh(mean)


def gaussian_log_prob(value, mean, log_std):
    """Elementwise diagonal-Gaussian log density."""
    var = torch.exp(2.0 * log_std)
    return -0.5 * ((value - mean) ** 2 / var + 2.0 * log_std + math.log(2.0 * math.pi))


def tanh_log_det(pre_squash):
    """Elementwise log |d tanh(x)/dx|, in the numerically stable form."""
    return 2.0 * (math.log(2.0) - pre_squash - nn.functional.softplus(-2.0 * pre_squash))


class QNetwork(nn.Module):
    """One critic head; dropout and layer normalization are optional."""

    def __init__(self, z_dim, action_dim, hidden=256, dropout=0.02,
                 layer_norm=True, dtype=torch.float32):
        super().__init__()
        layers = []
        width = z_dim + action_dim
        for _ in range(2):
            layers.append(nn.Linear(width, hidden, dtype=dtype))
            if dropout > 0.0:
                layers.append(nn.Dropout(dropout))
            if layer_norm:
                layers.append(nn.LayerNorm(hidden, dtype=dtype))
            layers.append(nn.ReLU())
            width = hidden
        layers.append(nn.Linear(width, 1, dtype=dtype))
        self.net = nn.Sequential(*layers)

    def forward(self, z, action):
        return self.net(torch.cat([z, action], dim=-1)).squeeze(-1)


class TwinCritic(nn.Module):
    """Pair of independent critics; targets use their pointwise minimum."""

    def __init__(self, z_dim, action_dim, hidden=256, dropout=0.02,
                 layer_norm=True, dtype=torch.float32):
        super().__init__()
        self.q1 = QNetwork(z_dim, action_dim, hidden, dropout, layer_norm, dtype)
        self.q2 = QNetwork(z_dim, action_dim, hidden, dropout, layer_norm, dtype)

    def forward(self, z, action):
        return self.q1(z, action), self.q2(z, action)

    def minimum(self, z, action):
        q1, q2 = self(z, action)
        return torch.minimum(q1, q2)


def polyak_update(target, online, tau):
    """Move target parameters a fraction tau toward the online ones."""
    with torch.no_grad():
        for p_t, p_o in zip(target.parameters(), online.parameters()):
            p_t.mul_(1.0 - tau).add_(p_o, alpha=tau)
        for b_t, b_o in zip(target.buffers(), online.buffers()):
            b_t.copy_(b_o)


def flat_parameters(module):
    """All parameters of a module as one float64 vector."""
    return np.concatenate(
        [p.detach().cpu().numpy().astype(np.float64).ravel()
         for p in module.parameters()]
    )


def load_flat_parameters(module, vector):
    """Write a flat float64 vector back into a module's parameters."""
    vector = np.asarray(vector, dtype=np.float64)
    offset = 0
    with torch.no_grad():
        for p in module.parameters():
            count = p.numel()
            chunk = vector[offset:offset + count].reshape(p.shape)
            p.copy_(torch.from_numpy(chunk).to(p.dtype))
            offset += count
    if offset != vector.size:
        raise ConfigurationError(
            f"parameter vector has {vector.size} entries, module needs {offset}"
        )
