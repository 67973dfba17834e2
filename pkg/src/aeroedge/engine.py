"""Slot mechanics shared by the experiment harness and the learning
environment: candidate enumeration, link rates with equal bandwidth sharing
among a slot's concurrent offloads, sequential head-task claiming, batch
decision application, and UAV movement.

Within a slot: arrivals spawn (if enabled), decisions are selected against
slot-start positions and claimed in ascending UAV order, applied with the
shared per-link bandwidth, then UAVs move toward their waypoints and the
slot is settled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .channel import AirGroundParams, GroundLinkParams, rate_uav_abs, rate_uav_node
from .offloading import (CompletionRecord, NodeId, OffloadDecision,
                         ScheduledTask, apply_decision, node_position)
from .world import TaskSpec, TaskStatus, WorldState, in_area, step_uav


@dataclass(frozen=True)
class ChannelConfig:
    air: AirGroundParams
    ground: GroundLinkParams

    def validate(self) -> None:
        self.air.validate()
        self.ground.validate()


# a slot pick: (origin uav, task, executor)
Pick = tuple[int, TaskSpec, NodeId]

# selector(world, uav_index, claimed task keys) -> executor NodeId or None;
# None means the UAV stays idle this slot
Selector = Callable[[WorldState, int, TaskSpec], Optional[NodeId]]


def candidate_nodes(world: WorldState, uav_index: int) -> list[NodeId]:
    """Action candidates in fixed order: self (local), peer UAVs ascending,
    TBSs ascending, then the ABS."""
    nodes = [NodeId.uav(uav_index)]
    nodes += [NodeId.uav(j) for j in range(len(world.uavs)) if j != uav_index]
    nodes += [NodeId.tbs(b) for b in range(len(world.tbs_positions))]
    nodes.append(NodeId.abs_node())
    return nodes


def link_rate(world: WorldState, chan: ChannelConfig, origin_uav: int,
              executor: NodeId, bandwidth: float) -> float:
    """Achievable rate for this slot's link from a UAV to an executor."""
    origin = world.uavs[origin_uav].pos
    if executor.kind == "abs":
        return rate_uav_abs(origin, world.abs_position, bandwidth, chan.air,
                            chan.ground.noise_power, world.config.uav.tx_power)
    return rate_uav_node(origin, node_position(world, executor), bandwidth,
                         chan.ground, world.config.uav.tx_power)


def claimable_head(world: WorldState, uav_index: int,
                   claimed: set[tuple[int, int]]) -> Optional[TaskSpec]:
    """The first unclaimed pending task of the UAV's assigned area, provided
    the UAV has physically reached the area. One claim per UAV per slot."""
    uav = world.uavs[uav_index]
    m = uav.assigned_area
    if m is None:
        return None
    if not in_area(uav.pos, world.areas[m]):
        return None
    for task in world.areas[m].queue:
        if task.status is TaskStatus.PENDING and task.key not in claimed:
            return task
    return None


def select_picks(world: WorldState, selector: Selector) -> list[Pick]:
    """One pass over UAVs in ascending order; each eligible UAV claims its
    area-head task and the selector names the executor (or skips)."""
    picks: list[Pick] = []
    claimed: set[tuple[int, int]] = set()
    for u in range(len(world.uavs)):
        task = claimable_head(world, u, claimed)
        if task is None:
            continue
        executor = selector(world, u, task)
        if executor is None:
            continue
        claimed.add(task.key)
        picks.append((u, task, executor))
    return picks


def apply_picks(world: WorldState, chan: ChannelConfig,
                picks: list[Pick]) -> list[ScheduledTask]:
    """Apply a slot's picks in claim order. The system bandwidth is split
    equally among the slot's concurrent offload transmissions."""
    n_offloads = sum(1 for u, task, ex in picks
                     if not (ex.kind == "uav" and ex.index == u))
    share = chan.ground.bandwidth / n_offloads if n_offloads else chan.ground.bandwidth
    scheduled = []
    for u, task, executor in picks:
        decision = OffloadDecision(task=task.key, executor=executor,
                                   origin_uav=u, decided_slot=world.slot)
        is_local = executor.kind == "uav" and executor.index == u
        rate = None if is_local else link_rate(world, chan, u, executor, share)
        scheduled.append(apply_decision(world, decision, rate=rate))
    return scheduled


def move_uavs(world: WorldState) -> None:
    """Advance every UAV one slot toward its waypoint (hover when none)."""
    for uav in world.uavs:
        target = uav.waypoint if uav.waypoint is not None else uav.pos
        step_uav(uav, target, world.config.uav, world.tau)


def run_slot(world: WorldState, chan: ChannelConfig,
             selector: Selector) -> tuple[list[ScheduledTask],
                                          list[CompletionRecord]]:
    """Run one slot's decision/movement/settlement cycle. Arrivals and
    reassignment checks are the episode loop's job, as is advancing
    world.slot afterwards."""
    picks = select_picks(world, selector)
    scheduled = apply_picks(world, chan, picks)
    move_uavs(world)
    records = settle(world)
    return scheduled, records


def settle(world: WorldState) -> list[CompletionRecord]:
    from .offloading import settle_slot
    return settle_slot(world, world.slot)


def eligible_areas(world: WorldState) -> list[int]:
    """Areas that still hold pending tasks; all areas when none do."""
    pending = [m for m, area in enumerate(world.areas)
               if any(t.status is TaskStatus.PENDING for t in area.queue)]
    return pending if pending else list(range(len(world.areas)))


def needs_reassignment(world: WorldState) -> bool:
    """True when some UAV's assigned area has run out of pending tasks while
    pending tasks remain elsewhere (the event-triggered re-auction rule)."""
    with_pending = {m for m, area in enumerate(world.areas)
                    if any(t.status is TaskStatus.PENDING for t in area.queue)}
    if not with_pending:
        return False
    return any(u.assigned_area not in with_pending for u in world.uavs)


def install_assignment(world: WorldState, assignment: list[int]) -> None:
    """Record area assignments and point each UAV at the nearest point of
    its area (minimal-flight-energy waypoint)."""
    from .auction import plan_waypoint
    for u, m in enumerate(assignment):
        uav = world.uavs[u]
        uav.assigned_area = m
        uav.waypoint = plan_waypoint(uav, world.areas[m])


def auction_assign(world: WorldState, chan: ChannelConfig,
                   gamma1: float = -0.001, gamma2: float = 1.0,
                   bid_scale: float = 1.0, capacity: Optional[int] = None,
                   areas: Optional[list[int]] = None):
    """Estimate every (UAV, area) pair, run the bid/allocate/price pipeline,
    and map the result back to world area indices.

    Returns (assignment per UAV, auction result over the estimated columns,
    the estimated area index list, the bid matrix).
    """
    from .auction import build_bids, run_auction
    from .estimator import estimate_area
    columns = areas if areas is not None else eligible_areas(world)
    estimates = [[estimate_area(world, u, m, chan.air, chan.ground)
                  for m in columns]
                 for u in range(len(world.uavs))]
    bids = build_bids(estimates, gamma1, gamma2, bid_scale)
    result = run_auction(bids, capacity)
    assignment = [columns[result.assignment[u]]
                  for u in range(len(world.uavs))]
    return assignment, result, columns, bids


def projected_completion(world: WorldState, uav_index: int, task: TaskSpec,
                         executor: NodeId, rate: Optional[float]) -> float:
    """Completion time the engine would record for this pick right now."""
    from .offloading import local_completion, offload_completion, node_cpu_hz, queue_entries
    t_start = world.slot * world.tau
    if executor.kind == "uav" and executor.index == uav_index:
        return local_completion(task, world.uavs[uav_index],
                                world.config.uav.cpu_hz, t_start)
    if rate is None or rate <= 0:
        raise ValueError("offload projection needs a positive rate")
    return offload_completion(task, rate, queue_entries(world, executor),
                              node_cpu_hz(world, executor), t_start)
