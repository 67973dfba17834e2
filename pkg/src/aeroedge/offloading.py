"""Per-task execution semantics: local service, offload transmission plus
remote service, FIFO queue evolution, energy charging, and deadline
settlement.

Completion arithmetic is continuous within slots; a decision made at slot t
starts at wall time t*tau and the resulting completion time is finalized by
settle_slot once it falls inside a slot. Component order in every completion
sum is start + transmission + wait + service (transmission zero for local),
which the test oracles reproduce verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .errors import ConstraintError
from .world import TaskSpec, TaskStatus, UavState, WorldState, in_area


@dataclass(frozen=True)
class NodeId:
    """An execution node: a UAV (index), a TBS (index), or the single ABS."""

    kind: str  # "uav" | "tbs" | "abs"
    index: int = 0

    @classmethod
    def uav(cls, index: int) -> "NodeId":
        return cls("uav", index)

    @classmethod
    def tbs(cls, index: int) -> "NodeId":
        return cls("tbs", index)

    @classmethod
    def abs_node(cls) -> "NodeId":
        return cls("abs", 0)

    def __str__(self) -> str:
        return self.kind if self.kind == "abs" else f"{self.kind}{self.index}"


@dataclass
class OffloadDecision:
    """Executor choice for one task. executor == Uav(origin_uav) means local
    processing; anything else is an offload."""

    task: tuple[int, int]  # (area m, task n)
    executor: NodeId
    origin_uav: int
    decided_slot: int


@dataclass
class NodeQueue:
    node: NodeId
    entries: list[TaskSpec] = field(default_factory=list)


@dataclass
class ScheduledTask:
    """A decision's precomputed execution record, pending settlement."""

    task: TaskSpec
    executor: NodeId
    origin_uav: int
    t_start: float
    transmission: float
    wait: float
    service: float
    completion_time: float
    deadline_s: float
    energy: float


@dataclass
class CompletionRecord:
    task: tuple[int, int]
    completion_time: float
    deadline: float
    succeeded: bool
    energy: float
    size_bits: float
    spawn_slot: int
    executor: NodeId
    origin_uav: int


def queue_entries(world: WorldState, node: NodeId) -> list[TaskSpec]:
    """The live FIFO queue list of an execution node."""
    if node.kind == "uav":
        return world.uavs[node.index].local_queue
    if node.kind == "tbs":
        return world.tbs_queues[node.index]
    if node.kind == "abs":
        return world.abs_queue
    raise ValueError(f"unknown node kind {node.kind!r}")


def node_cpu_hz(world: WorldState, node: NodeId) -> float:
    if node.kind == "uav":
        return world.config.uav.cpu_hz
    if node.kind == "tbs":
        return world.config.tbs_cpu_hz
    return world.config.abs_cpu_hz


def node_kappa(world: WorldState, node: NodeId) -> float:
    if node.kind == "uav":
        return world.config.uav.kappa
    if node.kind == "tbs":
        return world.config.tbs_kappa
    return world.config.abs_kappa


def node_position(world: WorldState, node: NodeId):
    if node.kind == "uav":
        return world.uavs[node.index].pos
    if node.kind == "tbs":
        return world.tbs_positions[node.index]
    return world.abs_position


def _entries(queue: Union[NodeQueue, Sequence[TaskSpec]]) -> Sequence[TaskSpec]:
    return queue.entries if isinstance(queue, NodeQueue) else queue


def local_wait(queue: Union[NodeQueue, Sequence[TaskSpec]], cpu_hz: float) -> float:
    """Queueing delay at a node: sum of d*c/f over the queued tasks."""
    if cpu_hz <= 0:
        raise ValueError("cpu_hz must be positive")
    total = 0.0
    for task in _entries(queue):
        total += task.size_bits * task.density / cpu_hz
    return total


def local_completion(task: TaskSpec, uav: UavState, cpu_hz: float,
                     t_start: float) -> float:
    """Completion time of local processing: start + queue wait + service."""
    return t_start + local_wait(uav.local_queue, cpu_hz) + task.cycles / cpu_hz


def local_energy(task: TaskSpec, params) -> float:
    """Local compute energy on the origin UAV: kappa * f^2 * d * c."""
    return params.kappa * params.cpu_hz * params.cpu_hz * task.cycles


def offload_completion(task: TaskSpec, rate: float,
                       dest_queue: Union[NodeQueue, Sequence[TaskSpec]],
                       dest_cpu_hz: float, t_start: float) -> float:
    """Completion time of an offload: start + transmission + destination
    queue wait + remote service."""
    if rate <= 0:
        raise ValueError("link unavailable: rate must be positive")
    return (t_start + task.size_bits / rate
            + local_wait(dest_queue, dest_cpu_hz) + task.cycles / dest_cpu_hz)


def offload_energy(task: TaskSpec, rate: float, tx_power: float,
                   dest_kappa: float, dest_cpu_hz: float) -> float:
    """Transmission energy plus remote compute energy:
    P_tx * d / rate + kappa_dest * f_dest^2 * d * c."""
    if rate <= 0:
        raise ValueError("link unavailable: rate must be positive")
    return tx_power * task.size_bits / rate + dest_kappa * dest_cpu_hz * dest_cpu_hz * task.cycles


def find_task(world: WorldState, key: tuple[int, int]) -> TaskSpec:
    m, n = key
    return world.area_tasks[m][n]


def apply_decision(world: WorldState, decision: OffloadDecision,
                   rate: Optional[float] = None) -> ScheduledTask:
    """Consume a task's single execution decision.

    Checks the lifetime single-assignment rule and the presence constraints
    (origin assigned to and physically inside the task's area), moves the
    task from the area queue to the executor queue, precomputes completion
    time and energy, and charges the energy to the origin UAV's ledger.
    ``rate`` (bits/s) is required for offloads; it is ignored for local
    execution.
    """
    m, n = decision.task
    task = find_task(world, decision.task)
    if decision.task in world.decided:
        raise ConstraintError(f"task {decision.task} already has a decision")
    if task.status is not TaskStatus.PENDING:
        raise ConstraintError(f"task {decision.task} is not pending")
    uav = world.uavs[decision.origin_uav]
    if uav.assigned_area != m:
        raise ConstraintError(
            f"uav {decision.origin_uav} not assigned to area {m}")
    if not in_area(uav.pos, world.areas[m]):
        raise ConstraintError(
            f"uav {decision.origin_uav} has not reached area {m}")

    executor = decision.executor
    is_local = executor.kind == "uav" and executor.index == decision.origin_uav
    t_start = decision.decided_slot * world.tau
    params = world.config.uav
    dest_entries = queue_entries(world, executor)
    cpu = node_cpu_hz(world, executor)

    if is_local:
        transmission = 0.0
        wait = local_wait(dest_entries, cpu)
        service = task.cycles / cpu
        completion = t_start + wait + service
        energy = local_energy(task, params)
    else:
        if rate is None or rate <= 0:
            raise ValueError(
                f"link unavailable: offload to {executor} needs a positive rate")
        transmission = task.size_bits / rate
        wait = local_wait(dest_entries, cpu)
        service = task.cycles / cpu
        completion = t_start + transmission + wait + service
        energy = offload_energy(task, rate, params.tx_power,
                                node_kappa(world, executor), cpu)

    area_queue = world.areas[m].queue
    area_queue.remove(task)
    dest_entries.append(task)
    task.status = TaskStatus.IN_SERVICE
    task.executor = executor
    world.decided.add(decision.task)
    uav.proc_energy += energy
    uav.energy_spent += energy

    scheduled = ScheduledTask(
        task=task, executor=executor, origin_uav=decision.origin_uav,
        t_start=t_start, transmission=transmission, wait=wait, service=service,
        completion_time=completion, deadline_s=task.deadline_slot * world.tau,
        energy=energy)
    world.in_service.append(scheduled)
    return scheduled


def settle_slot(world: WorldState, t: int) -> list[CompletionRecord]:
    """Finalize every in-service task whose completion time falls at or
    before the end of slot t. Success means completion no later than the
    deadline (closed inequality); expired tasks are dropped for good."""
    slot_end = (t + 1) * world.tau
    finished = [st for st in world.in_service if st.completion_time <= slot_end]
    records = []
    for st in finished:
        succeeded = st.completion_time <= st.deadline_s
        st.task.status = TaskStatus.SUCCEEDED if succeeded else TaskStatus.EXPIRED
        queue_entries(world, st.executor).remove(st.task)
        records.append(CompletionRecord(
            task=st.task.key, completion_time=st.completion_time,
            deadline=st.deadline_s, succeeded=succeeded, energy=st.energy,
            size_bits=st.task.size_bits, spawn_slot=st.task.spawn_slot,
            executor=st.executor, origin_uav=st.origin_uav))
    world.in_service = [st for st in world.in_service
                        if st.completion_time > slot_end]
    world.records.extend(records)
    return records
