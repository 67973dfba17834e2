"""Physical scenario: task areas, task generation, UAV placement, mobility,
and flight energy, advancing in discrete slots of length tau seconds.

Conventions: SI units throughout (meters, seconds, bits, watts, joules).
Altitude is held fixed per UAV; motion is horizontal planar motion toward a
waypoint at min(v_max, distance/tau).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import ConfigError
from .seeding import stream

G_ACCEL = 9.8  # m/s^2


@dataclass(frozen=True)
class Position3:
    """A point in the arena; z is altitude above ground."""

    x: float
    y: float
    z: float = 0.0

    def horizontal_distance(self, other: "Position3") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def distance(self, other: "Position3") -> float:
        return math.sqrt(
            (self.x - other.x) ** 2 + (self.y - other.y) ** 2 + (self.z - other.z) ** 2
        )


class TaskStatus(Enum):
    PENDING = "pending"
    IN_SERVICE = "in_service"
    SUCCEEDED = "succeeded"
    EXPIRED = "expired"


@dataclass
class TaskSpec:
    """One computation task: size in bits, compute density in cycles/bit,
    and an absolute deadline in slot units."""

    area_id: int
    task_id: int
    size_bits: float
    density: float
    deadline_slot: int
    status: TaskStatus = TaskStatus.PENDING
    executor: Optional[object] = None  # NodeId once in service
    spawn_slot: int = 0

    @property
    def cycles(self) -> float:
        return self.size_bits * self.density

    @property
    def key(self) -> tuple[int, int]:
        return (self.area_id, self.task_id)


@dataclass
class TaskArea:
    """Circular ground region holding a FIFO queue of pending tasks."""

    center: Position3
    radius: float
    queue: list[TaskSpec] = field(default_factory=list)


@dataclass
class UavParams:
    """Physical and compute parameters shared by all UAVs.

    ``hover_power_w`` pins the hover power directly (the simulation default
    uses the 35 W flight power figure); when None it is derived from the
    rotor physics via :func:`hover_power`.
    """

    mass: float = 2.0  # kg
    prop_radius: float = 0.2  # m
    prop_count: int = 4
    air_density: float = 1.225  # kg/m^3
    v_max: float = 15.0  # m/s
    p_max: float = 60.0  # W at full speed
    p_stop: float = 10.0  # W idle
    cpu_hz: float = 2e9
    tx_power: float = 0.1  # W
    kappa: float = 1e-28  # J*s^2/cycle^3
    hover_power_w: Optional[float] = 35.0

    def validate(self) -> None:
        for name in ("mass", "prop_radius", "prop_count", "air_density",
                     "v_max", "p_max", "p_stop", "cpu_hz", "tx_power", "kappa"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"uav.{name} must be strictly positive")
        if self.p_max <= self.p_stop:
            raise ConfigError("uav.p_max must exceed uav.p_stop")
        if self.hover_power_w is not None and self.hover_power_w <= 0:
            raise ConfigError("uav.hover_power_w must be positive when set")


@dataclass
class UavState:
    pos: Position3
    speed: float = 0.0
    assigned_area: Optional[int] = None
    local_queue: list[TaskSpec] = field(default_factory=list)
    energy_spent: float = 0.0  # J, cumulative flight + processing
    flight_energy: float = 0.0  # J, cumulative
    proc_energy: float = 0.0  # J, cumulative
    waypoint: Optional[Position3] = None


@dataclass
class WorldConfig:
    arena_side: float = 1000.0
    slot_seconds: float = 1.0
    n_slots: int = 100
    uav_altitude: float = 30.0
    n_uavs: int = 6
    n_tbs: int = 2
    n_areas: int = 4
    tasks_per_area: int = 20
    size_min_bits: float = 0.5e6
    size_max_bits: float = 1.0e6
    density_cpb: float = 300.0
    deadline_min_slots: int = 5
    deadline_max_slots: int = 30
    arrival_prob: float = 0.0  # per-slot per-area Bernoulli arrivals, off by default
    area_radius: float = 100.0
    area_centers: Optional[list[tuple[float, float]]] = None
    tbs_positions: Optional[list[tuple[float, float]]] = None
    abs_altitude: float = 200.0
    tbs_cpu_hz: float = 3e9
    abs_cpu_hz: float = 4e9
    tbs_kappa: float = 1e-28
    abs_kappa: float = 1e-28
    uav: UavParams = field(default_factory=UavParams)
    master_seed: int = 0

    def validate(self) -> None:
        positive = ("arena_side", "slot_seconds", "uav_altitude", "area_radius",
                    "size_min_bits", "size_max_bits", "density_cpb",
                    "tbs_cpu_hz", "abs_cpu_hz", "tbs_kappa", "abs_kappa")
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigError(f"world.{name} must be strictly positive")
        for name in ("n_slots", "n_uavs", "n_tbs", "n_areas", "tasks_per_area"):
            if getattr(self, name) < 1:
                raise ConfigError(f"world.{name} must be at least 1")
        if self.size_min_bits > self.size_max_bits:
            raise ConfigError("world.size_min_bits exceeds size_max_bits")
        if self.deadline_min_slots < 0 or self.deadline_max_slots < self.deadline_min_slots:
            raise ConfigError("world.deadline_min_slots/deadline_max_slots invalid")
        if not 0.0 <= self.arrival_prob <= 1.0:
            raise ConfigError("world.arrival_prob must lie in [0, 1]")
        if self.area_centers is not None and len(self.area_centers) != self.n_areas:
            raise ConfigError("world.area_centers length must equal n_areas")
        if self.tbs_positions is not None and len(self.tbs_positions) != self.n_tbs:
            raise ConfigError("world.tbs_positions length must equal n_tbs")
        self.uav.validate()


@dataclass
class WorldState:
    """Everything that evolves during an episode.

    UAV local queues live on the UavState; TBS/ABS queues live here. The
    ``in_service`` list holds scheduled completions created by decisions
    (see the offloading module), ``records`` the finalized outcomes.
    """

    config: WorldConfig
    slot: int
    uavs: list[UavState]
    areas: list[TaskArea]
    area_tasks: list[list[TaskSpec]]  # every task ever spawned, per area
    tbs_positions: list[Position3]
    abs_position: Position3
    tbs_queues: list[list[TaskSpec]]
    abs_queue: list[TaskSpec]
    in_service: list = field(default_factory=list)  # ScheduledTask entries
    records: list = field(default_factory=list)  # CompletionRecord entries
    decided: set = field(default_factory=set)  # task keys with a consumed decision

    @property
    def tau(self) -> float:
        return self.config.slot_seconds

    @property
    def now(self) -> float:
        """Wall-clock time at the start of the current slot."""
        return self.slot * self.config.slot_seconds


def _default_area_centers(n: int, side: float) -> list[tuple[float, float]]:
    k = math.ceil(math.sqrt(n))
    cell = side / k
    centers = []
    for j in range(k):
        for i in range(k):
            centers.append(((i + 0.5) * cell, (j + 0.5) * cell))
    return centers[:n]


def _default_tbs_positions(n: int, side: float) -> list[tuple[float, float]]:
    # evenly spaced along the arena diagonal (third-points for n=2)
    return [(side * (i + 1) / (n + 1), side * (i + 1) / (n + 1)) for i in range(n)]


def init_world(config: WorldConfig) -> WorldState:
    """Build the slot-0 world: areas seeded with tasks_per_area pending tasks,
    UAVs at uniform-random arena positions at cruise altitude, ledgers zero.

    All randomness is drawn from streams derived from config.master_seed, so
    equal configs produce bit-identical worlds.
    """
    config.validate()
    side = config.arena_side

    centers = config.area_centers or _default_area_centers(config.n_areas, side)
    areas = []
    area_tasks: list[list[TaskSpec]] = []
    for m, (cx, cy) in enumerate(centers):
        rng = stream(config.master_seed, f"tasks:{m}")
        tasks = []
        for n in range(config.tasks_per_area):
            size = float(rng.uniform(config.size_min_bits, config.size_max_bits))
            deadline = int(rng.integers(config.deadline_min_slots,
                                        config.deadline_max_slots + 1))
            tasks.append(TaskSpec(area_id=m, task_id=n, size_bits=size,
                                  density=config.density_cpb, deadline_slot=deadline))
        areas.append(TaskArea(center=Position3(cx, cy, 0.0),
                              radius=config.area_radius, queue=list(tasks)))
        area_tasks.append(tasks)

    rng = stream(config.master_seed, "uavs")
    uavs = []
    for _ in range(config.n_uavs):
        x = float(rng.uniform(0.0, side))
        y = float(rng.uniform(0.0, side))
        uavs.append(UavState(pos=Position3(x, y, config.uav_altitude)))

    tbs_xy = config.tbs_positions or _default_tbs_positions(config.n_tbs, side)
    tbs_positions = [Position3(x, y, 0.0) for x, y in tbs_xy]
    abs_position = Position3(side / 2.0, side / 2.0, config.abs_altitude)

    return WorldState(
        config=config,
        slot=0,
        uavs=uavs,
        areas=areas,
        area_tasks=area_tasks,
        tbs_positions=tbs_positions,
        abs_position=abs_position,
        tbs_queues=[[] for _ in range(config.n_tbs)],
        abs_queue=[],
    )


def spawn_arrivals(world: WorldState) -> int:
    """Bernoulli per-slot task arrivals (no-op unless arrival_prob > 0).
    New deadlines are absolute: current slot plus a fresh draw."""
    cfg = world.config
    if cfg.arrival_prob <= 0.0:
        return 0
    spawned = 0
    for m, area in enumerate(world.areas):
        rng = stream(cfg.master_seed, f"arrivals:{m}:{world.slot}")
        if rng.random() < cfg.arrival_prob:
            size = float(rng.uniform(cfg.size_min_bits, cfg.size_max_bits))
            rel = int(rng.integers(cfg.deadline_min_slots, cfg.deadline_max_slots + 1))
            task = TaskSpec(area_id=m, task_id=len(world.area_tasks[m]),
                            size_bits=size, density=cfg.density_cpb,
                            deadline_slot=world.slot + rel, spawn_slot=world.slot)
            area.queue.append(task)
            world.area_tasks[m].append(task)
            spawned += 1
    return spawned


def hover_power(params: UavParams) -> float:
    """Hover power in watts: sqrt((M*g)^3 / (2*pi*rho*p*theta)), or the
    pinned value when the config fixes it."""
    if params.hover_power_w is not None:
        return params.hover_power_w
    num = (params.mass * G_ACCEL) ** 3
    den = 2.0 * math.pi * params.prop_radius * params.prop_count * params.air_density
    return math.sqrt(num / den)


def move_power(v: float, params: UavParams) -> float:
    """Motion-induced power at speed v: linear ramp from 0 at hover to
    (p_max - p_stop) at v_max."""
    if v < 0.0 or v > params.v_max:
        raise ValueError(f"speed {v} outside [0, v_max={params.v_max}]")
    return (v / params.v_max) * (params.p_max - params.p_stop)


def flight_energy(delta: float, v: float, params: UavParams, tau: float) -> float:
    """Flight energy for moving delta meters at speed v within one slot.

    The v=0 slot (pure hover) costs hover_power * tau; the division-by-speed
    form only applies to actual motion.
    """
    if delta < 0.0:
        raise ValueError("delta must be nonnegative")
    if v == 0.0:
        if delta > 0.0:
            raise ValueError("cannot cover positive distance at zero speed")
        return hover_power(params) * tau
    if v < 0.0 or v > params.v_max:
        raise ValueError(f"speed {v} outside [0, v_max={params.v_max}]")
    if delta > v * tau + 1e-9:
        raise ValueError(f"infeasible motion: delta={delta} exceeds v*tau={v * tau}")
    if delta == 0.0:
        return 0.0
    return (hover_power(params) + move_power(v, params)) * (delta / v)


def step_uav(uav: UavState, waypoint: Position3, params: UavParams,
             tau: float) -> tuple[UavState, float]:
    """Advance one UAV one slot toward the waypoint (horizontal motion only).

    Speed is min(v_max, distance/tau): the UAV either arrives exactly or
    covers v_max*tau along the segment. Flight energy (hover cost when
    already there) is charged to the energy ledger. Returns the mutated
    state and the horizontal displacement.
    """
    dist = uav.pos.horizontal_distance(waypoint)
    if dist <= params.v_max * tau:
        delta = dist
        speed = dist / tau
        new_pos = Position3(waypoint.x, waypoint.y, uav.pos.z)
    else:
        delta = params.v_max * tau
        speed = params.v_max
        frac = delta / dist
        new_pos = Position3(uav.pos.x + (waypoint.x - uav.pos.x) * frac,
                            uav.pos.y + (waypoint.y - uav.pos.y) * frac,
                            uav.pos.z)
    energy = flight_energy(delta, speed, params, tau)
    uav.pos = new_pos
    uav.speed = speed
    uav.energy_spent += energy
    uav.flight_energy += energy
    return uav, delta


def in_area(pos: Position3, area: TaskArea) -> bool:
    """Availability indicator: horizontal distance to the area center within
    the radius, boundary included. Altitude is ignored."""
    dx = pos.x - area.center.x
    dy = pos.y - area.center.y
    return dx * dx + dy * dy <= area.radius * area.radius
