"""Harness-facing policy that pairs auction-based area assignment with the
learned (or freshly initialized) actors for per-slot offloading."""

from __future__ import annotations

from typing import Optional, Sequence

from ..engine import auction_assign, candidate_nodes
from ..offloading import NodeId
from ..seeding import stream
from ..world import TaskSpec, WorldState
from .actor import sample_action
from .env import build_observation
from .trainer import build_actors_and_critic, load_checkpoint

import numpy as np


class MarlPolicy:
    """Two-timescale policy: marginal-price auction at epochs, actor-sampled
    executor choices each slot. Without a checkpoint the actors are freshly
    initialized from the seed (an untrained policy)."""

    def __init__(self, config, seed: int, use_diffusion: bool,
                 checkpoint: Optional[str] = None):
        self.name = "dhappo" if use_diffusion else "happo"
        self.config = config
        if checkpoint:
            self.actors, _, meta = load_checkpoint(checkpoint)
            expected_actions = config.world.n_uavs + config.world.n_tbs + 1
            if (meta["n_agents"] != config.world.n_uavs
                    or meta["n_actions"] != expected_actions):
                raise ValueError(
                    "checkpoint scenario shape does not match the configuration")
            if meta["use_diffusion"] != use_diffusion:
                raise ValueError("checkpoint diffusion mode mismatch")
        else:
            self.actors, _ = build_actors_and_critic(config, seed, use_diffusion)
        self.rng = stream(seed, "policy-actions")
        self.last_auction = None

    def assign(self, world: WorldState,
               eligible: Optional[Sequence[int]] = None) -> list[int]:
        a = self.config.auction
        assignment, result, columns, _ = auction_assign(
            world, self.config.channel, a.gamma1, a.gamma2, a.bid_scale,
            a.capacity, areas=list(eligible) if eligible is not None else None)
        self.last_auction = (result, columns)
        return assignment

    def select(self, world: WorldState, u: int, task: TaskSpec) -> NodeId:
        obs = build_observation(world, u)
        mask = np.ones(len(candidate_nodes(world, u)), dtype=bool)
        action, _, _ = sample_action(self.actors[u], obs, mask, self.rng)
        return candidate_nodes(world, u)[action]
