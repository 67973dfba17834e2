import pytest

from aeroedge.channel import AirGroundParams, GroundLinkParams
from aeroedge.engine import ChannelConfig, install_assignment
from aeroedge.world import Position3, UavParams, WorldConfig, init_world


def tiny_config(**overrides) -> WorldConfig:
    """A small, fast scenario; override any field."""
    base = dict(arena_side=400.0, n_uavs=2, n_tbs=1, n_areas=2,
                tasks_per_area=3, n_slots=20, area_radius=60.0,
                deadline_min_slots=5, deadline_max_slots=15, master_seed=7)
    base.update(overrides)
    return WorldConfig(**base)


def make_world(**overrides):
    return init_world(tiny_config(**overrides))


def park_uav(world, u, m):
    """Put UAV u at area m's center (assigned, present, hovering)."""
    area = world.areas[m]
    uav = world.uavs[u]
    uav.pos = Position3(area.center.x, area.center.y, uav.pos.z)
    uav.assigned_area = m
    uav.waypoint = uav.pos
    return uav


@pytest.fixture
def chan():
    return ChannelConfig(air=AirGroundParams(), ground=GroundLinkParams())


@pytest.fixture
def world():
    return make_world()


def physical_params(**overrides) -> UavParams:
    """Rotor-physics parameters (hover power derived, not pinned)."""
    base = dict(hover_power_w=None)
    base.update(overrides)
    return UavParams(**base)
