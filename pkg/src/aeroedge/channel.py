"""Link models: sigmoid-weighted air-ground path loss for the UAV-ABS link
and inverse-square ground links for UAV-TBS / UAV-UAV, plus the Shannon
rates built on them.

The air-ground loss comes out in dB and is converted to a linear channel
gain (10^(-L/10)) before entering any SNR, keeping the rate expression
dimensionally consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, GeometryError
from .world import Position3

LIGHT_SPEED = 3e8  # m/s


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(linear: float) -> float:
    if linear <= 0.0:
        raise ValueError("linear value must be positive for dB conversion")
    return 10.0 * math.log10(linear)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


@dataclass(frozen=True)
class AirGroundParams:
    """Sigmoid LoS-excess parameters plus carrier constants for the ABS link.

    Defaults are standard dense-urban values: a=9.61, b=0.16, 1 dB LoS excess,
    20 dB NLoS excess, 2.4 GHz carrier.
    """

    zeta_los: float = 1.0  # dB
    zeta_nlos: float = 20.0  # dB
    sigmoid_a: float = 9.61
    sigmoid_b: float = 0.16
    carrier_hz: float = 2.4e9
    light_speed: float = LIGHT_SPEED

    def validate(self) -> None:
        if self.zeta_los < 0 or self.zeta_nlos <= self.zeta_los:
            raise ConfigError("channel.zeta_nlos must exceed zeta_los >= 0")
        if self.carrier_hz <= 0:
            raise ConfigError("channel.carrier_hz must be positive")


@dataclass(frozen=True)
class GroundLinkParams:
    """Inverse-square ground link: gain g0 at 1 m, receiver noise power,
    and the total system bandwidth shared by concurrent links."""

    g0: float = 1e-4  # linear gain at 1 m (-40 dB)
    noise_power: float = dbm_to_watts(-114.0)  # W
    bandwidth: float = 10e6  # Hz

    def validate(self) -> None:
        if self.g0 <= 0:
            raise ConfigError("channel.g0 must be positive")
        if self.noise_power <= 0:
            raise ConfigError("channel.noise_power must be positive")
        if self.bandwidth <= 0:
            raise ConfigError("channel.bandwidth must be positive")


def elevation_angle(uav: Position3, abs_pos: Position3) -> float:
    """Elevation of the ABS as seen from the UAV, in degrees in [0, 90]."""
    horizontal = uav.horizontal_distance(abs_pos)
    vertical = abs(abs_pos.z - uav.z)
    if horizontal == 0.0 and vertical == 0.0:
        raise GeometryError("coincident UAV and ABS positions")
    if horizontal == 0.0:
        return 90.0
    return math.degrees(math.atan(vertical / horizontal))


def air_ground_pathloss_db(uav: Position3, abs_pos: Position3,
                           p: AirGroundParams) -> float:
    """Air-ground path loss in dB: sigmoid-weighted LoS/NLoS excess plus the
    free-space term 20*log10(4*pi*f_c*d/C) plus the NLoS floor."""
    d = uav.distance(abs_pos)
    if d == 0.0:
        raise GeometryError("zero-length UAV-ABS link")
    angle = elevation_angle(uav, abs_pos)
    sigmoid = 1.0 + p.sigmoid_a * math.exp(-p.sigmoid_b * (angle - p.sigmoid_a))
    excess = (p.zeta_los - p.zeta_nlos) / sigmoid
    fspl = 20.0 * math.log10(4.0 * math.pi * p.carrier_hz * d / p.light_speed)
    return excess + fspl + p.zeta_nlos


def rate_uav_abs(uav_pos: Position3, abs_pos: Position3, bandwidth: float,
                 p: AirGroundParams, noise: float, tx_power: float) -> float:
    """Achievable UAV-to-ABS rate in bits/s over the given bandwidth share."""
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    loss_db = air_ground_pathloss_db(uav_pos, abs_pos, p)
    gain = db_to_linear(-loss_db)
    return bandwidth * math.log2(1.0 + tx_power * gain / noise)


def ground_gain(a_pos: Position3, b_pos: Position3, g0: float) -> float:
    """Linear channel gain of a ground link: g0 / distance^2 (3-D distance)."""
    d = a_pos.distance(b_pos)
    if d == 0.0:
        raise GeometryError("zero-length ground link")
    return g0 / (d * d)


def rate_uav_node(a_pos: Position3, node_pos: Position3, bandwidth: float,
                  g: GroundLinkParams, tx_power: float) -> float:
    """Achievable rate in bits/s from a UAV to a TBS or peer UAV."""
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    gain = ground_gain(a_pos, node_pos, g.g0)
    return bandwidth * math.log2(1.0 + tx_power * gain / g.noise_power)
