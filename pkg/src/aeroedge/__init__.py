"""UAV/base-station edge-computing simulator with auction-based area
assignment and a latent-diffusion multi-agent PPO offloading learner."""

from .channel import AirGroundParams, GroundLinkParams
from .config import RunConfig, default_config, load_config
from .engine import ChannelConfig
from .harness import ResultRow, run_episode, run_sweep
from .metrics import EpisodeMetrics, episode_metrics
from .offloading import CompletionRecord, NodeId, OffloadDecision
from .world import (Position3, TaskArea, TaskSpec, TaskStatus, UavParams,
                    UavState, WorldConfig, WorldState, init_world)

__version__ = "0.1.0"

__all__ = [
    "AirGroundParams", "GroundLinkParams", "RunConfig", "default_config",
    "load_config", "ChannelConfig", "ResultRow", "run_episode", "run_sweep",
    "EpisodeMetrics", "episode_metrics", "CompletionRecord", "NodeId",
    "OffloadDecision", "Position3", "TaskArea", "TaskSpec", "TaskStatus",
    "UavParams", "UavState", "WorldConfig", "WorldState", "init_world",
    "__version__",
]
