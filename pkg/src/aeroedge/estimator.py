"""Per-(UAV, area) prediction of on-time-completable task count and total
energy (flight plus cheapest execution mode per task), used to price bids.

Candidate execution modes per task: local processing, every TBS, the ABS,
and currently idle peer UAVs (empty local queue). Link rates are computed
from the area center at the UAV's cruise altitude, since the UAV evaluates
an area it has not yet traveled to, over the full system bandwidth.
Complexity is O(candidates * tasks) per area.
"""

from __future__ import annotations

from dataclasses import dataclass

from .channel import AirGroundParams, GroundLinkParams, rate_uav_abs, rate_uav_node
from .offloading import NodeId, local_energy, node_cpu_hz, node_kappa, node_position
from .world import Position3, WorldState, hover_power, move_power


@dataclass
class AreaEstimate:
    est_success: int
    est_energy: float  # J, flight + summed per-task minima
    per_task_choice: list[NodeId]
    flight_time: float  # s
    flight_energy: float  # J


def candidate_nodes_for_estimation(world: WorldState, uav_index: int) -> list[NodeId]:
    """Offload candidates: idle peer UAVs (ascending), TBSs, then the ABS."""
    peers = [NodeId.uav(j) for j, peer in enumerate(world.uavs)
             if j != uav_index and not peer.local_queue]
    tbs = [NodeId.tbs(b) for b in range(len(world.tbs_positions))]
    return peers + tbs + [NodeId.abs_node()]


def estimate_area(world: WorldState, uav_index: int, area_index: int,
                  air: AirGroundParams, ground: GroundLinkParams,
                  speed: float | None = None) -> AreaEstimate:
    """Predict task successes and energy for one UAV serving one area.

    Flight: straight-line travel at the given speed (default v_max) to the
    area center; flight power is hover plus motion-induced power. Per task,
    the cheapest-energy mode is selected; a task counts as completable when
    current time + travel time + the cumulative transmission/service time of
    it and every earlier task (in their chosen modes, FIFO) meets its
    deadline. The success count is defensively capped at the queue length.
    """
    params = world.config.uav
    v = params.v_max if speed is None else speed
    if v <= 0:
        raise ValueError("travel speed must be positive to reach the area")

    uav = world.uavs[uav_index]
    area = world.areas[area_index]
    distance = uav.pos.horizontal_distance(area.center)
    flight_time = distance / v
    flight_power = hover_power(params) + move_power(v, params)
    flight_en = flight_power * flight_time

    origin = Position3(area.center.x, area.center.y, uav.pos.z)
    candidates = candidate_nodes_for_estimation(world, uav_index)
    rates = {}
    for node in candidates:
        if node.kind == "abs":
            rates[node] = rate_uav_abs(origin, world.abs_position,
                                       ground.bandwidth, air,
                                       ground.noise_power, params.tx_power)
        else:
            rates[node] = rate_uav_node(origin, node_position(world, node),
                                        ground.bandwidth, ground, params.tx_power)

    local = NodeId.uav(uav_index)
    tau = world.tau
    completed = 0
    total_exec = 0.0
    cumulative = 0.0
    choices: list[NodeId] = []
    for task in area.queue:
        best_node = local
        best_energy = local_energy(task, params)
        best_time = task.cycles / params.cpu_hz
        for node in candidates:
            cpu = node_cpu_hz(world, node)
            energy = (params.tx_power * task.size_bits / rates[node]
                      + node_kappa(world, node) * cpu * cpu * task.cycles)
            if energy < best_energy:
                best_energy = energy
                best_node = node
                best_time = task.size_bits / rates[node] + task.cycles / cpu
        choices.append(best_node)
        total_exec += best_energy
        cumulative += best_time
        if world.now + flight_time + cumulative <= task.deadline_slot * tau:
            completed += 1

    return AreaEstimate(
        est_success=min(completed, len(area.queue)),
        est_energy=flight_en + total_exec,
        per_task_choice=choices,
        flight_time=flight_time,
        flight_energy=flight_en)
