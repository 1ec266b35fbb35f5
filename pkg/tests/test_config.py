import json

import pytest

from beaconquiz.config import (
    AppConfig,
    ConfigError,
    config_from_dict,
    dump_config,
    load_config,
    sanitized_config,
)


class TestDefaults:
    def test_minimal_config_fills_defaults(self):
        cfg = config_from_dict({"mode": "sim"})
        assert cfg.window_size == 10
        assert cfg.policy.enter_threshold_m == 1.5
        assert cfg.policy.exit_threshold_m == 2.2
        assert cfg.tick_rate_hz == 10
        assert cfg.room.width == 6.0
        assert cfg.room.beacons[0].advertise_interval_ms == 100

    def test_empty_object_is_sim_mode(self):
        assert config_from_dict({}).mode == "sim"

    def test_tick_ms(self):
        assert config_from_dict({}).tick_ms == 100
        assert config_from_dict({"tick_rate_hz": 25}).tick_ms == 40


class TestValidation:
    def test_replay_requires_replay_path(self):
        with pytest.raises(ConfigError, match="replay_path"):
            config_from_dict({"mode": "replay"})

    def test_unknown_mode(self):
        with pytest.raises(ConfigError, match="mode"):
            config_from_dict({"mode": "hardware"})

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="windowsize"):
            config_from_dict({"windowsize": 5})

    def test_tick_rate_bounds(self):
        with pytest.raises(ConfigError, match="tick_rate_hz"):
            config_from_dict({"tick_rate_hz": 0})
        with pytest.raises(ConfigError, match="tick_rate_hz"):
            config_from_dict({"tick_rate_hz": 101})

    def test_window_size_bound(self):
        with pytest.raises(ConfigError, match="window_size"):
            config_from_dict({"window_size": 0})

    def test_listen_parsing(self):
        cfg = config_from_dict({"listen": "0.0.0.0:9000"})
        assert (cfg.listen_host, cfg.listen_port) == ("0.0.0.0", 9000)
        with pytest.raises(ConfigError, match="listen"):
            config_from_dict({"listen": "no-port"})
        with pytest.raises(ConfigError, match="listen"):
            config_from_dict({"listen": "host:notanumber"})

    def test_policy_errors_carry_field_path(self):
        with pytest.raises(ConfigError, match="policy"):
            config_from_dict({"policy": {"enter_threshold_m": 3.0, "exit_threshold_m": 1.0}})

    def test_room_errors_carry_field_path(self):
        with pytest.raises(ConfigError, match="room.width"):
            config_from_dict({"room": {"width": "wide"}})

    def test_live_feed_format(self):
        assert config_from_dict({"mode": "live", "live_feed": "tcp:9100"}).live_feed == "tcp:9100"
        with pytest.raises(ConfigError, match="live_feed"):
            config_from_dict({"live_feed": "udp:1"})


class TestRoundTrip:
    def test_dump_then_parse_is_identity(self):
        cfg = config_from_dict(
            {
                "mode": "sim",
                "seed": 99,
                "listen": "127.0.0.1:9999",
                "tick_rate_hz": 20,
                "shuffle_answers": False,
                "window_size": 7,
                "room": {
                    "width": 8.0,
                    "depth": 5.0,
                    "propagation": {"path_loss_exponent": 2.5, "noise_sigma_db": 1.0},
                },
                "policy": {"enter_threshold_m": 1.2, "exit_threshold_m": 2.0},
            }
        )
        assert config_from_dict(dump_config(cfg)) == cfg

    def test_default_config_round_trips(self):
        cfg = AppConfig()
        assert config_from_dict(dump_config(cfg)) == cfg


class TestLoadConfig:
    def test_missing_file(self):
        with pytest.raises(ConfigError, match="not found"):
            load_config("/nonexistent/config.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{nope")
        with pytest.raises(ConfigError, match="invalid JSON"):
            load_config(str(path))

    def test_relative_paths_resolve_against_config_dir(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"mode": "sim", "questions_path": "q.json"}))
        cfg = load_config(str(path))
        assert cfg.questions_path == str(tmp_path / "q.json")

    def test_beacon_overrides(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(
            json.dumps(
                {
                    "room": {
                        "beacons": [
                            {"id": 0, "tx_power_1m_dbm": -55.0},
                            {"id": 1},
                            {"id": 2},
                            {"id": 3, "advertise_interval_ms": 250},
                        ]
                    }
                }
            )
        )
        cfg = load_config(str(path))
        assert cfg.room.beacons[0].tx_power_1m_dbm == -55.0
        assert cfg.room.beacons[3].advertise_interval_ms == 250
        assert cfg.room.beacons[1].tx_power_1m_dbm == -59.0


class TestSanitized:
    def test_no_paths_or_answers_leak(self):
        cfg = config_from_dict({"questions_path": "/secret/questions.json"})
        view = sanitized_config(cfg, 15, ("100", "200"))
        text = json.dumps(view)
        assert "/secret" not in text
        assert view["question_count"] == 15
        assert view["corners"][0] == {
            "corner": 0, "name": "NW", "color": "blue", "number": 1,
        }
        assert view["ladder"] == ["100", "200"]
