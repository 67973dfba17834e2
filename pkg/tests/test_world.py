import math

import numpy as np
import pytest

from aeroedge.errors import ConfigError
from aeroedge.world import (Position3, TaskStatus, UavParams, UavState,
                            WorldConfig,flight_energy, hover_power, in_area,
                            init_world, move_power, step_uav)
from conftest import make_world, physical_params, tiny_config


class TestInitWorld:
    def test_task_counts(self):
        world = init_world(WorldConfig(n_areas=4, tasks_per_area=20))
        pending = sum(1 for area in world.areas for t in area.queue
                      if t.status is TaskStatus.PENDING)
        assert pending == 80

    def test_determinism_bit_identical(self):
        a = init_world(WorldConfig(master_seed=123))
        b = init_world(WorldConfig(master_seed=123))
        for ta, tb in zip((t for ar in a.areas for t in ar.queue),
                          (t for ar in b.areas for t in ar.queue)):
            assert ta.size_bits == tb.size_bits
            assert ta.deadline_slot == tb.deadline_slot
        for ua, ub in zip(a.uavs, b.uavs):
            assert ua.pos == ub.pos

    def test_different_seed_differs(self):
        a = init_world(WorldConfig(master_seed=1))
        b = init_world(WorldConfig(master_seed=2))
        assert any(ua.pos != ub.pos for ua, ub in zip(a.uavs, b.uavs))

    def test_task_distribution_bounds(self):
        world = init_world(WorldConfig(size_min_bits=0.5e6, size_max_bits=1.0e6,
                                       density_cpb=300.0, master_seed=5))
        for area in world.areas:
            for t in area.queue:
                assert 0.5e6 <= t.size_bits <= 1.0e6
                assert t.density == 300.0
                assert t.deadline_slot >= 0

    def test_uavs_inside_arena_at_altitude(self):
        world = init_world(WorldConfig(uav_altitude=30.0, master_seed=9))
        for uav in world.uavs:
            assert 0 <= uav.pos.x <= 1000 and 0 <= uav.pos.y <= 1000
            assert uav.pos.z == 30.0
            assert uav.energy_spent == 0.0

    def test_invalid_config_names_field(self):
        with pytest.raises(ConfigError, match="tasks_per_area"):
            init_world(WorldConfig(tasks_per_area=0))
        with pytest.raises(ConfigError, match="slot_seconds"):
            init_world(WorldConfig(slot_seconds=0.0))
        with pytest.raises(ConfigError, match="area_centers"):
            init_world(WorldConfig(n_areas=2, area_centers=[(1.0, 1.0)]))


class TestFlightPower:
    def test_hover_power_physical(self):
        # sqrt((2*9.8)^3 / (2*pi*0.2*4*1.225)) evaluated by hand
        p = hover_power(physical_params())
        assert p == pytest.approx(34.96883267659432, abs=1e-9)
        assert abs(p - 35.0) < 0.1

    def test_hover_power_pinned(self):
        assert hover_power(UavParams()) == 35.0

    def test_hover_mass_scaling(self):
        base = hover_power(physical_params())
        heavy = hover_power(physical_params(mass=8.0))
        assert heavy == pytest.approx(8.0 * base, rel=1e-12)

    def test_hover_air_density_scaling(self):
        base = hover_power(physical_params())
        dense = hover_power(physical_params(air_density=2 * 1.225))
        assert dense == pytest.approx(base / math.sqrt(2.0), rel=1e-12)

    def test_move_power_values(self):
        params = UavParams()
        assert move_power(15.0, params) == 50.0
        assert move_power(0.0, params) == 0.0
        assert move_power(7.5, params) == 25.0

    def test_move_power_domain(self):
        with pytest.raises(ValueError):
            move_power(-1.0, UavParams())
        with pytest.raises(ValueError):
            move_power(15.1, UavParams())


class TestFlightEnergy:
    def test_cruise_energy_exact(self):
        # (35 + 50) W for 150 m at 15 m/s -> 10 s of flight
        assert flight_energy(150.0, 15.0, UavParams(), tau=10.0) == 850.0

    def test_hover_slot(self):
        assert flight_energy(0.0, 0.0, UavParams(), tau=1.0) == 35.0

    def test_zero_distance_moving(self):
        assert flight_energy(0.0, 15.0, UavParams(), tau=1.0) == 0.0

    def test_infeasible_motion(self):
        with pytest.raises(ValueError, match="infeasible"):
            flight_energy(20.0, 15.0, UavParams(), tau=1.0)
        with pytest.raises(ValueError):
            flight_energy(5.0, 0.0, UavParams(), tau=1.0)

    def test_monotone_in_distance(self):
        params = UavParams()
        energies = [flight_energy(d, 15.0, params, tau=1.0)
                    for d in np.linspace(0.0, 15.0, 25)]
        assert all(b >= a for a, b in zip(energies, energies[1:]))
        assert energies[0] == 0.0


class TestStepUav:
    def test_arrives_exactly(self):
        uav = UavState(pos=Position3(0, 0, 30))
        _, delta = step_uav(uav, Position3(10, 0, 30), UavParams(), tau=1.0)
        assert delta == 10.0
        assert uav.pos.x == 10.0 and uav.speed == 10.0

    def test_clamped_motion(self):
        uav = UavState(pos=Position3(0, 0, 30))
        _, delta = step_uav(uav, Position3(100, 0, 30), UavParams(), tau=1.0)
        assert delta == 15.0
        assert uav.pos.x == pytest.approx(15.0)
        assert uav.speed == 15.0

    def test_hover_at_waypoint(self):
        uav = UavState(pos=Position3(5, 5, 30))
        _, delta = step_uav(uav, Position3(5, 5, 30), UavParams(), tau=1.0)
        assert delta == 0.0
        assert uav.energy_spent == 35.0  # hover cost still charged

    def test_energy_ledger_nondecreasing_and_bounded_steps(self):
        rng = np.random.default_rng(3)
        params = UavParams()
        uav = UavState(pos=Position3(500, 500, 30))
        last_energy = 0.0
        for _ in range(50):
            target = Position3(rng.uniform(0, 1000), rng.uniform(0, 1000), 30)
            before = (uav.pos.x, uav.pos.y)
            _, delta = step_uav(uav, target, params, tau=1.0)
            assert delta <= params.v_max * 1.0 + 1e-9
            assert math.hypot(uav.pos.x - before[0], uav.pos.y - before[1]) \
                == pytest.approx(delta, abs=1e-9)
            assert 0 <= uav.pos.x <= 1000 and 0 <= uav.pos.y <= 1000
            assert uav.energy_spent >= last_energy
            last_energy = uav.energy_spent
        assert math.isfinite(uav.energy_spent)


class TestInArea:
    def test_center_and_boundary(self):
        world = make_world()
        area = world.areas[0]
        assert in_area(area.center, area)
        boundary = Position3(area.center.x + area.radius, area.center.y, 30)
        assert in_area(boundary, area)

    def test_just_outside(self):
        world = make_world()
        area = world.areas[0]
        outside = Position3(area.center.x + area.radius + 1e-6,
                            area.center.y, 30)
        assert not in_area(outside, area)


def test_task_conservation_after_init():
    world = make_world(tasks_per_area=5)
    for m, tasks in enumerate(world.area_tasks):
        assert len(tasks) == 5
        assert all(t.status is TaskStatus.PENDING for t in tasks)
        assert world.areas[m].queue == tasks


def test_arrival_knob_spawns_tasks():
    cfg = tiny_config(arrival_prob=1.0)
    world = init_world(cfg)
    from aeroedge.world import spawn_arrivals
    world.slot = 3
    spawned = spawn_arrivals(world)
    assert spawned == cfg.n_areas
    for tasks in world.area_tasks:
        assert tasks[-1].spawn_slot == 3
        assert tasks[-1].deadline_slot >= 3 + cfg.deadline_min_slots
