"""Episode-level aggregation: system energy, bits-per-joule efficiency,
per-area completion ratios, latency, and the weighted objective value."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import AccountingError
from .offloading import ScheduledTask
from .world import WorldState


@dataclass
class EpisodeMetrics:
    system_energy: float  # J, all UAVs over the episode
    bits_succeeded: float
    eta: float  # bits per joule
    completion_ratio_per_area: list[float]
    avg_latency: float  # s, succeeded tasks, from spawn to completion
    objective: float  # eta + beta * sum of per-area completion ratios
    beta_obj: float


def slot_processing_energy(decisions: Iterable[ScheduledTask]) -> float:
    """Total processing/offloading energy charged by a slot's decisions."""
    return sum(d.energy for d in decisions)


def uav_slot_energy(flight: float, processing: float) -> float:
    """One UAV's slot energy: flight plus processing."""
    if flight < 0 or processing < 0:
        raise ValueError("energies must be nonnegative")
    return flight + processing


def episode_metrics(world: WorldState, beta_obj: float = 1.0) -> EpisodeMetrics:
    """Aggregate a finished episode.

    eta is successfully processed bits over total UAV energy; the objective
    adds beta times the summed per-area completion ratios. Latency is
    measured from task spawn (slot 0 for the initial queues) to completion,
    averaged over succeeded tasks, and reported as 0 when nothing succeeded.
    """
    system_energy = sum(u.energy_spent for u in world.uavs)
    succeeded = [r for r in world.records if r.succeeded]
    bits = sum(r.size_bits for r in succeeded)
    if bits > 0 and system_energy <= 0:
        raise AccountingError("succeeded bits recorded with zero system energy")
    eta = bits / system_energy if system_energy > 0 else 0.0

    tau = world.config.slot_seconds
    ratios = []
    for m, tasks in enumerate(world.area_tasks):
        done = sum(1 for r in succeeded if r.task[0] == m)
        ratios.append(done / len(tasks) if tasks else 0.0)

    if succeeded:
        avg_latency = sum(r.completion_time - r.spawn_slot * tau
                          for r in succeeded) / len(succeeded)
    else:
        avg_latency = 0.0

    objective = eta + beta_obj * sum(ratios)
    return EpisodeMetrics(
        system_energy=system_energy, bits_succeeded=bits, eta=eta,
        completion_ratio_per_area=ratios, avg_latency=avg_latency,
        objective=objective, beta_obj=beta_obj)
