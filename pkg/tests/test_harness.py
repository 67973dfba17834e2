import pytest

from aeroedge.config import config_from_dict, default_config, load_config
from aeroedge.errors import ConfigError
from aeroedge.harness import (CSV_HEADER, ResultRow, apply_axis,
                              auction_snapshot, make_policy, parse_csv,
                              run_episode, run_sweep, write_csv)
from aeroedge.seeding import derive_stream_seed

import aeroedge.harness as harness


class TestConfig:
    def test_defaults_valid(self):
        default_config().validate()

    def test_default_scenario_shape(self):
        cfg = default_config()
        assert cfg.world.n_uavs == 6
        assert cfg.world.n_tbs == 2
        assert cfg.world.n_areas == 4
        assert cfg.world.n_slots == 100
        assert cfg.channel.ground.bandwidth == 10e6
        assert cfg.training.learning_rate == 1e-4
        assert cfg.training.batch_size == 128

    def test_yaml_overrides(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text(
            "world:\n"
            "  n_uavs: 3\n"
            "  uav:\n"
            "    cpu_hz: 2.5e9\n"
            "channel:\n"
            "  ground:\n"
            "    bandwidth: 5.0e6\n"
            "auction:\n"
            "  gamma1: -0.01\n"
            "policy:\n"
            "  name: lbrbo\n"
            "training:\n"
            "  latent_dim: 16\n"
            "sweep:\n"
            "  axis: BandwidthMHz\n"
            "  values: [2, 10, 18]\n"
            "repetitions: 3\n")
        cfg = load_config(str(path))
        assert cfg.world.n_uavs == 3
        assert cfg.world.uav.cpu_hz == 2.5e9
        assert cfg.channel.ground.bandwidth == 5.0e6
        assert cfg.auction.gamma1 == -0.01
        assert cfg.policy.name == "lbrbo"
        assert cfg.training.latent_dim == 16
        assert cfg.sweep.axis == "BandwidthMHz"
        assert cfg.repetitions == 3

    def test_unknown_field_named(self):
        with pytest.raises(ConfigError, match="world.flux"):
            config_from_dict({"world": {"flux": 1}})
        with pytest.raises(ConfigError, match="nonsense"):
            config_from_dict({"nonsense": {}})

    def test_invalid_values_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"sweep": {"axis": "Nope", "values": [1]}})
        with pytest.raises(ConfigError):
            config_from_dict({"training": {"clip_epsilon": 1.5}})
        with pytest.raises(ConfigError):
            config_from_dict({"policy": {"name": "unknown"}})


class TestSeeding:
    def test_deterministic(self):
        assert derive_stream_seed(42, "abc") == derive_stream_seed(42, "abc")

    def test_label_and_master_sensitivity(self):
        assert derive_stream_seed(42, "a") != derive_stream_seed(42, "b")
        assert derive_stream_seed(1, "a") != derive_stream_seed(2, "a")

    def test_no_collisions_over_corpus(self):
        seen = {derive_stream_seed(7, f"label:{i}") for i in range(10_000)}
        assert len(seen) == 10_000

    def test_in_u64_range(self):
        s = derive_stream_seed(2**63, "x" * 100)
        assert 0 <= s < 2**64

    def test_golden_vectors(self):
        # byte-defined derivation: these values hold on every platform
        assert derive_stream_seed(0, "world") == 9836795258827177501
        assert derive_stream_seed(42, "tasks:0") == 2402528846569568831
        assert derive_stream_seed(2**63, "rollout:1:2") == 11817302922829022347
        assert derive_stream_seed(123456789, "eval-actions:7") == 504894667256789992


class TestCsv:
    def test_round_trip(self, tmp_path):
        rows = [ResultRow(seed=3, policy="gmsp", axis="UavCount", value=6.0,
                          eta_bits_per_J=1234.5678901234, completion_ratio=0.8125,
                          avg_latency_s=10.25, system_energy_J=31240.86,
                          objective=1237.0, error=""),
                ResultRow(seed=4, policy="muso", axis="UavCount", value=6.0,
                          eta_bits_per_J=0.0, completion_ratio=0.0,
                          avg_latency_s=0.0, system_energy_J=0.0,
                          objective=0.0, error="RuntimeError: boom")]
        path = tmp_path / "rows.csv"
        write_csv(rows, str(path))
        text = path.read_text()
        assert text.splitlines()[0] == CSV_HEADER
        assert parse_csv(str(path)) == rows

    def test_header_is_exact(self):
        assert CSV_HEADER == ("seed,policy,axis,value,eta_bits_per_J,"
                              "completion_ratio,avg_latency_s,system_energy_J,"
                              "objective,error")


class TestEpisode:
    def _quick_config(self):
        cfg = default_config()
        cfg.world.n_slots = 30
        cfg.world.n_uavs = 3
        cfg.world.tasks_per_area = 4
        return cfg

    def test_deterministic_rows(self):
        cfg = self._quick_config()
        a = run_episode(cfg, "gmsp", seed=5)
        b = run_episode(cfg, "gmsp", seed=5)
        assert a.to_line() == b.to_line()

    def test_policy_object_accepted(self):
        cfg = self._quick_config()
        row = run_episode(cfg, make_policy("lbrbo", cfg, 0), seed=1)
        assert row.policy == "lbrbo"

    def test_unknown_policy(self):
        with pytest.raises(ConfigError):
            make_policy("zigzag", default_config(), 0)


class TestSweep:
    def test_row_count_and_grid(self, tmp_path):
        cfg = default_config()
        cfg.world.n_slots = 10
        cfg.world.tasks_per_area = 2
        cfg.policy.names = ["gmsp", "lbrbo"]
        cfg.sweep.axis = "UavCount"
        cfg.sweep.values = [2, 3]
        cfg.repetitions = 2
        out = tmp_path / "sweep.csv"
        rows = run_sweep(cfg, base_seed=0, output_path=str(out))
        assert len(rows) == 2 * 2 * 2
        parsed = parse_csv(str(out))
        assert parsed == rows
        assert {r.value for r in rows} == {2.0, 3.0}
        assert all(r.error == "" for r in rows)

    def test_failures_marked(self, tmp_path, monkeypatch):
        cfg = default_config()
        cfg.policy.names = ["gmsp"]
        cfg.sweep.values = [2]
        cfg.repetitions = 2

        def explode(*args, **kwargs):
            raise RuntimeError("boom, with commas")

        monkeypatch.setattr(harness, "run_episode", explode)
        rows = run_sweep(cfg, base_seed=0, output_path=str(tmp_path / "x.csv"))
        assert len(rows) == 2
        assert all("boom" in r.error and "," not in r.error for r in rows)

    def test_sweep_requires_section(self):
        cfg = default_config()
        cfg.sweep = None
        with pytest.raises(ConfigError):
            run_sweep(cfg, output_path="")


class TestAxis:
    def test_uav_count(self):
        cfg = apply_axis(default_config(), "UavCount", 8)
        assert cfg.world.n_uavs == 8

    def test_task_size(self):
        cfg = apply_axis(default_config(), "TaskSizeMbit", 0.7)
        assert cfg.world.size_min_bits == cfg.world.size_max_bits == 0.7e6

    def test_bandwidth(self):
        cfg = apply_axis(default_config(), "BandwidthMHz", 18)
        assert cfg.channel.ground.bandwidth == 18e6

    def test_base_config_untouched(self):
        base = default_config()
        apply_axis(base, "UavCount", 9)
        assert base.world.n_uavs == 6


def test_auction_snapshot_text():
    cfg = default_config()
    cfg.world.n_uavs = 3
    text = auction_snapshot(cfg, seed=2)
    lines = text.splitlines()
    assert lines[0].startswith("areas estimated")
    assert len(lines) == 4
    assert all("price" in line for line in lines[1:])
