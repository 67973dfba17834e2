"""Markov-game wrapper over the slot engine for learning and evaluation.

Observation layout (all entries normalized, fixed length 17 + 3*n_tbs):

    [0:3]    own position x, y, z / arena_side
    [3:3+3B] each TBS position x, y, z / arena_side
    [..+3]   ABS position x, y, z / arena_side
    [..+4]   assigned area: center x, center y, radius / arena_side, inside flag
    [..+5]   area queue: pending count / tasks_per_area, head-exists flag,
             head size / size_max, head density / density_cpb,
             head slots-to-deadline / n_slots
    [..+2]   own queue: length / tasks_per_area,
             queued work seconds / (n_slots * tau)

An agent acts only on slots where it holds a claim: it is inside its
assigned area and an unclaimed pending task heads the area queue (ascending
UAV order claims). Its action indexes the fixed candidate list (self, peer
UAVs, TBSs, ABS). The per-slot team reward sums, over the slot's decisions,
the per-joule energy penalty and the success bonus; success is known at
decision time because completion arithmetic is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..engine import (ChannelConfig, apply_picks, auction_assign,
                      candidate_nodes, claimable_head, eligible_areas,
                      install_assignment, move_uavs, needs_reassignment,
                      settle)
from ..world import TaskStatus, WorldState, init_world, spawn_arrivals


@dataclass(frozen=True)
class RewardParams:
    alpha_energy: float = 0.1  # per joule
    gamma_success: float = 1.0  # per on-time completion

    def validate(self) -> None:
        if self.alpha_energy < 0 or self.gamma_success < 0:
            raise ValueError("reward weights must be nonnegative")


def reward(params: RewardParams, energy: float, succeeded: bool) -> float:
    """Per-decision reward: -alpha * energy + gamma * success."""
    return -params.alpha_energy * energy + params.gamma_success * float(succeeded)


def observation_dim(n_tbs: int) -> int:
    return 17 + 3 * n_tbs


def build_observation(world: WorldState, uav_index: int) -> np.ndarray:
    """Local observation of one UAV (layout documented in the module
    docstring). Depends only on shared geometry, the UAV's own state, and
    its assigned area's queue, never on peer queues."""
    cfg = world.config
    side = cfg.arena_side
    uav = world.uavs[uav_index]
    parts = [uav.pos.x / side, uav.pos.y / side, uav.pos.z / side]
    for p in world.tbs_positions:
        parts += [p.x / side, p.y / side, p.z / side]
    a = world.abs_position
    parts += [a.x / side, a.y / side, a.z / side]

    m = uav.assigned_area
    if m is None:
        parts += [0.0, 0.0, 0.0, 0.0]
        pending = []
    else:
        area = world.areas[m]
        from ..world import in_area
        parts += [area.center.x / side, area.center.y / side,
                  area.radius / side, float(in_area(uav.pos, area))]
        pending = [t for t in area.queue if t.status is TaskStatus.PENDING]

    parts.append(len(pending) / cfg.tasks_per_area)
    if pending:
        head = pending[0]
        parts += [1.0, head.size_bits / cfg.size_max_bits,
                  head.density / cfg.density_cpb,
                  (head.deadline_slot - world.slot) / cfg.n_slots]
    else:
        parts += [0.0, 0.0, 0.0, 0.0]

    queued_work = sum(t.cycles for t in uav.local_queue) / cfg.uav.cpu_hz
    parts += [len(uav.local_queue) / cfg.tasks_per_area,
              queued_work / (cfg.n_slots * cfg.slot_seconds)]
    return np.array(parts, dtype=np.float64)


def global_state(world: WorldState) -> np.ndarray:
    """Critic input: every agent's observation concatenated."""
    return np.concatenate([build_observation(world, u)
                           for u in range(len(world.uavs))])


@dataclass
class EnvSnapshot:
    obs: list[np.ndarray]
    state: np.ndarray
    masks: list[np.ndarray]
    active: list[bool]


class OffloadEnv:
    """One seeded episode factory; reset() builds a fresh world and runs the
    large-timescale assignment, step() advances one slot."""

    def __init__(self, run_config, seed: int,
                 reward_params: Optional[RewardParams] = None,
                 terminate_when_done: bool = True):
        self.run_config = run_config
        self.chan: ChannelConfig = run_config.channel
        self.seed = seed
        self.reward_params = reward_params or RewardParams(
            run_config.training.reward_alpha, run_config.training.reward_gamma)
        self.reward_params.validate()
        self.terminate_when_done = terminate_when_done
        self.world: Optional[WorldState] = None
        self.n_agents = run_config.world.n_uavs
        self.n_actions = run_config.world.n_uavs + run_config.world.n_tbs + 1
        self.obs_dim = observation_dim(run_config.world.n_tbs)
        self.state_dim = self.n_agents * self.obs_dim
        self._claims: dict[int, object] = {}

    def _assign(self) -> None:
        a = self.run_config.auction
        assignment, _, _, _ = auction_assign(
            self.world, self.chan, a.gamma1, a.gamma2, a.bid_scale,
            a.capacity, areas=eligible_areas(self.world))
        install_assignment(self.world, assignment)

    def _begin_slot(self) -> None:
        spawn_arrivals(self.world)
        if self.world.slot > 0 and needs_reassignment(self.world):
            self._assign()
        claims = {}
        claimed = set()
        for u in range(self.n_agents):
            task = claimable_head(self.world, u, claimed)
            if task is not None:
                claims[u] = task
                claimed.add(task.key)
        self._claims = claims

    def snapshot(self) -> EnvSnapshot:
        obs = [build_observation(self.world, u) for u in range(self.n_agents)]
        state = np.concatenate(obs)
        masks = [np.ones(self.n_actions, dtype=bool) for _ in range(self.n_agents)]
        active = [u in self._claims for u in range(self.n_agents)]
        return EnvSnapshot(obs=obs, state=state, masks=masks, active=active)

    def reset(self) -> EnvSnapshot:
        wcfg = replace(self.run_config.world, master_seed=self.seed)
        self.world = init_world(wcfg)
        self._assign()
        self._begin_slot()
        return self.snapshot()

    def _all_resolved(self) -> bool:
        if self.world.in_service:
            return False
        return all(t.status is not TaskStatus.PENDING
                   for tasks in self.world.area_tasks for t in tasks)

    def step(self, actions: list[Optional[int]]
             ) -> tuple[EnvSnapshot, float, bool, dict]:
        """Apply the active agents' actions, advance the slot, and return
        (next snapshot, team reward, done, info)."""
        world = self.world
        picks = []
        for u in sorted(self._claims):
            action = actions[u]
            if action is None:
                raise ValueError(f"agent {u} is active and must act")
            executor = candidate_nodes(world, u)[action]
            picks.append((u, self._claims[u], executor))
        scheduled = apply_picks(world, self.chan, picks)
        team_reward = sum(
            reward(self.reward_params, st.energy,
                   st.completion_time <= st.deadline_s)
            for st in scheduled)
        move_uavs(world)
        settle(world)
        world.slot += 1
        done = world.slot >= world.config.n_slots
        if self.terminate_when_done and self._all_resolved():
            done = True
        if not done:
            self._begin_slot()
        else:
            self._claims = {}
        info = {"scheduled": scheduled}
        return self.snapshot(), float(team_reward), done, info
