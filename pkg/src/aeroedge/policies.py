"""Rule-based comparison policies.

Three baselines: nearest-area with local-only execution (greedy matching),
weighted proximity/urgency matching with threshold offloading, and
load-balanced routing to the least-loaded capable node. All are
deterministic given a world snapshot; tie-breaks are lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .engine import candidate_nodes
from .offloading import (NodeId, OffloadDecision, local_wait, node_cpu_hz,
                         node_position, queue_entries)
from .world import TaskSpec, TaskStatus, WorldState, in_area


@dataclass
class BaselineKind:
    kind: str  # "gmsp" | "muso" | "lbrbo"
    muso_w1: float = 0.5
    muso_w2: float = 0.5
    comm_range: Optional[float] = 600.0  # m; None = unlimited


def nearest_area(world: WorldState, uav_index: int,
                 eligible: Optional[Sequence[int]] = None) -> int:
    """Index of the horizontally nearest area center (tie: lowest index)."""
    areas = eligible if eligible is not None else range(len(world.areas))
    pos = world.uavs[uav_index].pos
    return min(areas, key=lambda m: (pos.horizontal_distance(world.areas[m].center), m))


def gmsp_assign(world: WorldState,
                eligible: Optional[Sequence[int]] = None) -> list[int]:
    return [nearest_area(world, u, eligible) for u in range(len(world.uavs))]


def muso_assign(world: WorldState, w1: float = 0.5, w2: float = 0.5,
                eligible: Optional[Sequence[int]] = None) -> list[int]:
    """Argmax of w1/(1 + distance) + w2/(1 + min pending deadline)."""
    areas = list(eligible) if eligible is not None else list(range(len(world.areas)))
    assignment = []
    for u in range(len(world.uavs)):
        pos = world.uavs[u].pos

        def score(m: int) -> float:
            dist = pos.horizontal_distance(world.areas[m].center)
            pending = [t.deadline_slot for t in world.areas[m].queue
                       if t.status is TaskStatus.PENDING]
            urgency = 1.0 / (1.0 + min(pending)) if pending else 0.0
            return w1 / (1.0 + dist) + w2 * urgency

        assignment.append(max(areas, key=lambda m: (score(m), -m)))
    return assignment


def _pending_claims(world: WorldState, assignments: Sequence[int]):
    """Yield (uav, head task) pairs in ascending UAV order under the given
    assignments, honoring presence and one claim per UAV per slot."""
    claimed: set[tuple[int, int]] = set()
    for u, m in enumerate(assignments):
        uav = world.uavs[u]
        if m is None or not in_area(uav.pos, world.areas[m]):
            continue
        for task in world.areas[m].queue:
            if task.status is TaskStatus.PENDING and task.key not in claimed:
                claimed.add(task.key)
                yield u, task
                break


def gmsp_select(world: WorldState, u: int, task: TaskSpec) -> NodeId:
    """Greedy baseline executes everything locally."""
    return NodeId.uav(u)


def muso_select(world: WorldState, u: int, task: TaskSpec,
                comm_range: Optional[float] = 600.0) -> NodeId:
    """Offload only when the local projection misses the deadline: nearest
    in-range TBS first, else the ABS if in range, else local regardless."""
    uav = world.uavs[u]
    cpu = world.config.uav.cpu_hz
    projected = (world.now + local_wait(uav.local_queue, cpu)
                 + task.cycles / cpu)
    if projected <= task.deadline_slot * world.tau:
        return NodeId.uav(u)
    in_range = (lambda p: True) if comm_range is None else (
        lambda p: uav.pos.distance(p) <= comm_range)
    tbs = [(uav.pos.distance(p), b) for b, p in enumerate(world.tbs_positions)
           if in_range(p)]
    if tbs:
        return NodeId.tbs(min(tbs)[1])
    if in_range(world.abs_position):
        return NodeId.abs_node()
    return NodeId.uav(u)


def lbrbo_select(world: WorldState, u: int, task: TaskSpec) -> NodeId:
    """Least-loaded capable node: minimal queue wait plus service time over
    self, peer UAVs, TBSs, and the ABS (ties follow candidate order)."""
    best = None
    best_cost = None
    for node in candidate_nodes(world, u):
        cpu = node_cpu_hz(world, node)
        cost = local_wait(queue_entries(world, node), cpu) + task.cycles / cpu
        if best_cost is None or cost < best_cost:
            best, best_cost = node, cost
    return best


def gmsp_decide(world: WorldState) -> tuple[list[int], list[OffloadDecision]]:
    """Nearest-area assignment; every claimable head task executed locally."""
    assignments = gmsp_assign(world)
    decisions = [OffloadDecision(task=task.key, executor=gmsp_select(world, u, task),
                                 origin_uav=u, decided_slot=world.slot)
                 for u, task in _pending_claims(world, assignments)]
    return assignments, decisions


def muso_decide(world: WorldState, w1: float = 0.5, w2: float = 0.5,
                comm_range: Optional[float] = 600.0
                ) -> tuple[list[int], list[OffloadDecision]]:
    """Proximity/urgency matching with fixed-threshold offloading."""
    assignments = muso_assign(world, w1, w2)
    decisions = [OffloadDecision(task=task.key,
                                 executor=muso_select(world, u, task, comm_range),
                                 origin_uav=u, decided_slot=world.slot)
                 for u, task in _pending_claims(world, assignments)]
    return assignments, decisions


def lbrbo_decide(world: WorldState) -> list[OffloadDecision]:
    """Load-balanced routing under the UAVs' current area assignments."""
    assignments = [uav.assigned_area for uav in world.uavs]
    return [OffloadDecision(task=task.key, executor=lbrbo_select(world, u, task),
                            origin_uav=u, decided_slot=world.slot)
            for u, task in _pending_claims(world, assignments)]


class GmSpPolicy:
    name = "gmsp"

    def assign(self, world: WorldState,
               eligible: Optional[Sequence[int]] = None) -> list[int]:
        return gmsp_assign(world, eligible)

    def select(self, world: WorldState, u: int, task: TaskSpec) -> NodeId:
        return gmsp_select(world, u, task)


class MuSoPolicy:
    name = "muso"

    def __init__(self, w1: float = 0.5, w2: float = 0.5,
                 comm_range: Optional[float] = 600.0):
        self.w1 = w1
        self.w2 = w2
        self.comm_range = comm_range

    def assign(self, world: WorldState,
               eligible: Optional[Sequence[int]] = None) -> list[int]:
        return muso_assign(world, self.w1, self.w2, eligible)

    def select(self, world: WorldState, u: int, task: TaskSpec) -> NodeId:
        return muso_select(world, u, task, self.comm_range)


class LbRboPolicy:
    """Load balancer; reuses the nearest-area assignment so the baselines
    differ only in how they offload."""

    name = "lbrbo"

    def assign(self, world: WorldState,
               eligible: Optional[Sequence[int]] = None) -> list[int]:
        return gmsp_assign(world, eligible)

    def select(self, world: WorldState, u: int, task: TaskSpec) -> NodeId:
        return lbrbo_select(world, u, task)
