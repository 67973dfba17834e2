from .actor import ActorConfig, Critic, DiffusionActor, masked_log_softmax, sample_action
from .diffusion import DiffusionSchedule, forward_diffuse
from .env import OffloadEnv, RewardParams, build_observation, global_state, observation_dim, reward
from .policy import MarlPolicy
from .trainer import (RolloutBuffer, TrainResult, compound_advantage,
                      evaluate_policy, gae_advantages, happo_clip_loss,
                      load_checkpoint, save_checkpoint, train)

__all__ = [
    "ActorConfig", "Critic", "DiffusionActor", "masked_log_softmax",
    "sample_action", "DiffusionSchedule", "forward_diffuse", "OffloadEnv",
    "RewardParams", "build_observation", "global_state", "observation_dim",
    "reward", "MarlPolicy", "RolloutBuffer", "TrainResult",
    "compound_advantage", "evaluate_policy", "gae_advantages",
    "happo_clip_loss", "load_checkpoint", "save_checkpoint", "train",
]
