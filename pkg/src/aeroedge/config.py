"""Run configuration: a YAML file with world / channel / auction / policy /
training sections plus sweep controls. Every default is overridable; unknown
keys are rejected with the offending field named."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import yaml

from .channel import AirGroundParams, GroundLinkParams
from .engine import ChannelConfig
from .errors import ConfigError
from .world import UavParams, WorldConfig

SWEEP_AXES = ("UavCount", "TaskSizeMbit", "BandwidthMHz")
POLICY_NAMES = ("gmsp", "muso", "lbrbo", "happo", "dhappo")


@dataclass
class AuctionConfig:
    gamma1: float = -0.001  # weight on estimated energy (negative penalizes)
    gamma2: float = 1.0  # weight on estimated successes
    bid_scale: float = 1.0
    capacity: Optional[int] = None  # max UAVs per area; None = uncapped
    assignment_log: Optional[str] = None  # text log: one "u a_u price" line per UAV

    def validate(self) -> None:
        if self.bid_scale <= 0:
            raise ConfigError("auction.bid_scale must be positive")
        if self.capacity is not None and self.capacity < 1:
            raise ConfigError("auction.capacity must be >= 1 when set")


@dataclass
class PolicyConfig:
    name: str = "gmsp"  # policy for single-episode runs
    names: list[str] = field(default_factory=lambda: list(POLICY_NAMES))
    muso_w1: float = 0.5
    muso_w2: float = 0.5
    comm_range: Optional[float] = 600.0  # m; None = unlimited
    checkpoint: Optional[str] = None  # trained parameters for happo/dhappo

    def validate(self) -> None:
        if self.name not in POLICY_NAMES:
            raise ConfigError(f"policy.name must be one of {POLICY_NAMES}")
        for n in self.names:
            if n not in POLICY_NAMES:
                raise ConfigError(f"policy.names entry {n!r} unknown")
        if self.comm_range is not None and self.comm_range <= 0:
            raise ConfigError("policy.comm_range must be positive when set")


@dataclass
class TrainingConfig:
    learning_rate: float = 1e-4
    batch_size: int = 128  # samples per denoising-loss draw
    clip_epsilon: float = 0.2
    gamma: float = 0.99
    gae_lambda: float = 0.95
    diffusion_steps: int = 10
    latent_dim: int = 32
    hidden: int = 128
    activation: str = "tanh"
    use_diffusion: bool = True
    iterations: int = 200
    rollout_episodes: int = 4
    diffusion_loss_weight: float = 0.1
    critic_epochs: int = 4
    advantage_normalize: bool = True
    reward_alpha: float = 0.1  # per-joule penalty
    reward_gamma: float = 1.0  # per-success bonus
    early_stop: bool = True  # end training episodes once all tasks resolve

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ConfigError("training.learning_rate must be positive")
        if not 0 < self.clip_epsilon < 1:
            raise ConfigError("training.clip_epsilon must lie in (0, 1)")
        if not 0 <= self.gamma <= 1 or not 0 <= self.gae_lambda <= 1:
            raise ConfigError("training.gamma/gae_lambda must lie in [0, 1]")
        for name in ("batch_size", "diffusion_steps", "latent_dim", "hidden",
                     "iterations", "rollout_episodes", "critic_epochs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"training.{name} must be >= 1")
        if self.activation not in ("tanh", "relu", "sigmoid", "leaky_relu"):
            raise ConfigError("training.activation unknown")
        if self.reward_alpha < 0 or self.reward_gamma < 0:
            raise ConfigError("training.reward weights must be nonnegative")
        if self.diffusion_loss_weight < 0:
            raise ConfigError("training.diffusion_loss_weight must be >= 0")


@dataclass
class SweepConfig:
    axis: str = "UavCount"
    values: list[float] = field(default_factory=lambda: [2, 4, 6, 8, 10])

    def validate(self) -> None:
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"sweep.axis must be one of {SWEEP_AXES}")
        if not self.values or any(v <= 0 for v in self.values):
            raise ConfigError("sweep.values must be a nonempty positive list")


@dataclass
class RunConfig:
    world: WorldConfig = field(default_factory=WorldConfig)
    channel: ChannelConfig = field(default_factory=lambda: ChannelConfig(
        air=AirGroundParams(), ground=GroundLinkParams()))
    auction: AuctionConfig = field(default_factory=AuctionConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    sweep: Optional[SweepConfig] = field(default_factory=SweepConfig)
    repetitions: int = 10
    output_path: str = "results.csv"
    objective_beta: float = 1.0

    def validate(self) -> None:
        self.world.validate()
        self.channel.validate()
        self.auction.validate()
        self.policy.validate()
        self.training.validate()
        if self.sweep is not None:
            self.sweep.validate()
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")


_NESTED = {
    "world": {"uav": UavParams},
    "channel": {"air": AirGroundParams, "ground": GroundLinkParams},
}
_PAIR_LIST_FIELDS = ("area_centers", "tbs_positions")


def _coerce(current, value, path: str):
    """Match the incoming YAML scalar to the default's type. PyYAML reads
    exponent literals without a sign (e.g. 2.5e9) as strings, so numeric
    fields convert explicitly."""
    if value is None or current is None:
        return value
    try:
        if isinstance(current, bool):
            if isinstance(value, bool):
                return value
            raise ConfigError(f"field {path} expects a boolean")
        if isinstance(current, int):
            return int(value)
        if isinstance(current, float):
            return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field {path} has a non-numeric value {value!r}") from exc
    return value


def _merge(instance, data: dict, path: str, nested: dict):
    if not isinstance(data, dict):
        raise ConfigError(f"section {path} must be a mapping")
    known = {f.name for f in fields(instance)}
    updates = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown field {path}.{key}")
        if key in nested:
            updates[key] = _merge(getattr(instance, key), value or {},
                                  f"{path}.{key}", {})
        elif key in _PAIR_LIST_FIELDS and value is not None:
            updates[key] = [tuple(float(c) for c in point) for point in value]
        else:
            updates[key] = _coerce(getattr(instance, key), value, f"{path}.{key}")
    return replace(instance, **updates)


def default_config() -> RunConfig:
    return RunConfig()


def config_from_dict(raw: dict) -> RunConfig:
    cfg = default_config()
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a mapping")
    known = {f.name for f in fields(RunConfig)}
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown field {key}")
    sections = {}
    for name in ("world", "auction", "policy", "training"):
        if name in raw:
            sections[name] = _merge(getattr(cfg, name), raw[name] or {},
                                    name, _NESTED.get(name, {}))
    if "channel" in raw:
        sections["channel"] = _merge(cfg.channel, raw["channel"] or {},
                                     "channel", _NESTED["channel"])
    if "sweep" in raw:
        sections["sweep"] = (None if raw["sweep"] is None
                             else _merge(SweepConfig(), raw["sweep"], "sweep", {}))
    for name in ("repetitions", "output_path", "objective_beta"):
        if name in raw:
            sections[name] = raw[name]
    cfg = replace(cfg, **sections)
    cfg.validate()
    return cfg


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    return config_from_dict(raw)


def dump_config(cfg: RunConfig) -> str:
    """YAML text of the full effective configuration."""
    return yaml.safe_dump(dataclasses.asdict(cfg), sort_keys=False)
