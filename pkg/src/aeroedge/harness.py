"""Experiment orchestration: seeded single episodes, sweep grids over UAV
count / task size / bandwidth, and CSV emission.

The two-timescale loop per episode: assignment (auction for the learned
policies, each baseline's own rule otherwise) at slot 0 and again whenever a
UAV's assigned area runs out of pending tasks while work remains elsewhere;
per-slot claiming, decisions, movement, and settlement in between.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

from .config import RunConfig
from .engine import eligible_areas, install_assignment, needs_reassignment, run_slot
from .errors import AccountingError, ConfigError
from .metrics import episode_metrics
from .policies import GmSpPolicy, LbRboPolicy, MuSoPolicy
from .seeding import derive_stream_seed, stream
from .world import init_world, spawn_arrivals

CSV_COLUMNS = ["seed", "policy", "axis", "value", "eta_bits_per_J",
               "completion_ratio", "avg_latency_s", "system_energy_J",
               "objective", "error"]
CSV_HEADER = ",".join(CSV_COLUMNS)


@dataclass
class ResultRow:
    seed: int
    policy: str
    axis: str
    value: float
    eta_bits_per_J: float
    completion_ratio: float
    avg_latency_s: float
    system_energy_J: float
    objective: float
    error: str = ""

    def to_line(self) -> str:
        return ",".join([
            str(self.seed), self.policy, self.axis, repr(float(self.value)),
            repr(float(self.eta_bits_per_J)), repr(float(self.completion_ratio)),
            repr(float(self.avg_latency_s)), repr(float(self.system_energy_J)),
            repr(float(self.objective)), self.error])

    @classmethod
    def from_line(cls, line: str) -> "ResultRow":
        parts = line.rstrip("\n").split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ValueError(f"malformed result row: {line!r}")
        return cls(seed=int(parts[0]), policy=parts[1], axis=parts[2],
                   value=float(parts[3]), eta_bits_per_J=float(parts[4]),
                   completion_ratio=float(parts[5]), avg_latency_s=float(parts[6]),
                   system_energy_J=float(parts[7]), objective=float(parts[8]),
                   error=parts[9])


def write_csv(rows: list[ResultRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row.to_line() + "\n")


def parse_csv(path: str) -> list[ResultRow]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header: {header!r}")
        return [ResultRow.from_line(line) for line in fh if line.strip()]


def make_policy(name: str, config: RunConfig, seed: int):
    p = config.policy
    if name == "gmsp":
        return GmSpPolicy()
    if name == "muso":
        return MuSoPolicy(p.muso_w1, p.muso_w2, p.comm_range)
    if name == "lbrbo":
        return LbRboPolicy()
    if name in ("happo", "dhappo"):
        from .marl.policy import MarlPolicy
        checkpoint = p.checkpoint if p.name == name else None
        return MarlPolicy(config, seed, use_diffusion=(name == "dhappo"),
                          checkpoint=checkpoint)
    raise ConfigError(f"unknown policy name {name!r}")


def _log_assignment(config: RunConfig, world, policy) -> None:
    log_path = config.auction.assignment_log
    auction = getattr(policy, "last_auction", None)
    if not log_path or auction is None:
        return
    result, _ = auction
    with open(log_path, "a", encoding="utf-8") as fh:
        fh.write(f"# slot {world.slot}\n")
        for u, area in enumerate(result.assignment):
            price = result.prices[u] if result.prices else float("nan")
            fh.write(f"{u} {world.uavs[u].assigned_area} {price!r}\n")


def run_episode(config: RunConfig, policy, seed: int, axis: str = "none",
                value: float = 0.0) -> ResultRow:
    """One full episode under one policy; returns the aggregated row.

    ``policy`` may be a name or a policy object. Identical (config, seed)
    pairs produce identical rows.
    """
    config.validate()
    if isinstance(policy, str):
        policy = make_policy(policy, config, seed)
    world = init_world(replace(config.world, master_seed=seed))
    install_assignment(world, policy.assign(world, eligible_areas(world)))
    _log_assignment(config, world, policy)

    for t in range(config.world.n_slots):
        world.slot = t
        spawn_arrivals(world)
        if t > 0 and needs_reassignment(world):
            install_assignment(world, policy.assign(world, eligible_areas(world)))
            _log_assignment(config, world, policy)
        run_slot(world, config.channel, policy.select)

    m = episode_metrics(world, config.objective_beta)
    total_tasks = sum(len(tasks) for tasks in world.area_tasks)
    succeeded = sum(1 for r in world.records if r.succeeded)
    ratio = succeeded / total_tasks if total_tasks else 0.0
    values = (m.eta, ratio, m.avg_latency, m.system_energy, m.objective)
    if not all(math.isfinite(v) for v in values):
        raise AccountingError(f"non-finite episode metrics: {values}")
    return ResultRow(seed=seed, policy=policy.name, axis=axis, value=value,
                     eta_bits_per_J=m.eta, completion_ratio=ratio,
                     avg_latency_s=m.avg_latency, system_energy_J=m.system_energy,
                     objective=m.objective)


def apply_axis(config: RunConfig, axis: str, value: float) -> RunConfig:
    if axis == "UavCount":
        return replace(config, world=replace(config.world, n_uavs=int(value)))
    if axis == "TaskSizeMbit":
        bits = value * 1e6
        return replace(config, world=replace(
            config.world, size_min_bits=bits, size_max_bits=bits))
    if axis == "BandwidthMHz":
        ground = replace(config.channel.ground, bandwidth=value * 1e6)
        return replace(config, channel=replace(config.channel, ground=ground))
    raise ConfigError(f"unknown sweep axis {axis!r}")


def _sanitize(message: str) -> str:
    return message.replace(",", ";").replace("\n", " ")[:200]


def run_sweep(config: RunConfig, base_seed: int = 0,
              output_path: str | None = None) -> list[ResultRow]:
    """Cartesian grid of sweep values x policies x repetition seeds; one CSV
    row per cell, failures recorded in the error column."""
    config.validate()
    if config.sweep is None:
        raise ConfigError("sweep section missing from the configuration")
    rows = []
    for value in config.sweep.values:
        cell_config = apply_axis(config, config.sweep.axis, value)
        for name in config.policy.names:
            for rep in range(config.repetitions):
                seed = base_seed + rep
                try:
                    rows.append(run_episode(cell_config, name, seed,
                                            axis=config.sweep.axis,
                                            value=float(value)))
                except Exception as exc:  # record, keep sweeping
                    rows.append(ResultRow(
                        seed=seed, policy=name, axis=config.sweep.axis,
                        value=float(value), eta_bits_per_J=0.0,
                        completion_ratio=0.0, avg_latency_s=0.0,
                        system_energy_J=0.0, objective=0.0,
                        error=_sanitize(f"{type(exc).__name__}: {exc}")))
    path = output_path or config.output_path
    if path:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        write_csv(rows, path)
    return rows


def auction_snapshot(config: RunConfig, seed: int) -> str:
    """Text report of one auction round on a fresh world: the bid matrix,
    the assignment, and the marginal prices (one line per UAV)."""
    from .engine import auction_assign
    config.validate()
    world = init_world(replace(config.world, master_seed=seed))
    a = config.auction
    assignment, result, columns, bids = auction_assign(
        world, config.channel, a.gamma1, a.gamma2, a.bid_scale, a.capacity)
    lines = [f"areas estimated: {columns}"]
    for u in range(len(world.uavs)):
        bid_row = ", ".join(f"{b:.4f}" for b in bids.values[u])
        lines.append(f"uav {u}: bids [{bid_row}] -> area {assignment[u]}"
                     f" price {result.prices[u]:.6f}")
    return "\n".join(lines)
