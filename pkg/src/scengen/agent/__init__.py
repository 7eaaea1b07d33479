"""Goal-conditioned agent: recurrent encoder, stochastic policy,
dropout-regularized critics, hindsight replay, and a derivative-free
search baseline."""

from .cem import CemResult, cem_search
from .checkpoint import load_checkpoint, save_checkpoint
from .networks import Actor, ScenarioEncoder, TwinCritic
from .replay import ReplayBuffer, Transition, her_relabel
from .sac import Agent, AgentConfig, evaluate_policy, train, variant_config

__all__ = [
    "Actor",
    "Agent",
    "AgentConfig",
    "CemResult",
    "ReplayBuffer",
    "ScenarioEncoder",
    "Transition",
    "TwinCritic",
    "cem_search",
    "evaluate_policy",
    "her_relabel",
    "load_checkpoint",
    "save_checkpoint",
    "train",
    "variant_config",
]
