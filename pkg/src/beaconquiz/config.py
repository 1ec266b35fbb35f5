"""Application configuration: loading, validation, defaults, round-trip dump.

The config file is JSON. Every field has a default except those a mode
requires (replay needs ``replay_path``); validation errors name the
offending field path.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from typing import Any

from .localization import SelectionPolicy
from .pipeline import DEFAULT_D_MAX_M, DEFAULT_WINDOW_SIZE
from .simulation import (
    CORNER_NAMES,
    DEFAULT_ADVERTISE_INTERVAL_MS,
    DEFAULT_BEACON_UUIDS,
    DEFAULT_CORNER_LEGEND,
    DEFAULT_TX_POWER_1M_DBM,
    CornerLegend,
    PropagationParams,
    RoomModel,
    make_room,
)

MODES = ("sim", "replay", "live")

DEFAULT_LISTEN = "127.0.0.1:8765"
DEFAULT_TICK_RATE_HZ = 10
DEFAULT_FEEDBACK_AUTO_ADVANCE_MS = 3000
DEFAULT_WALK_SPEED_MPS = 1.0
DEFAULT_UI_DIR = "frontend/dist"


class ConfigError(ValueError):
    """Invalid configuration; message starts with the field path."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


@dataclass(frozen=True)
class AppConfig:
    mode: str = "sim"
    seed: int = 0
    listen_host: str = "127.0.0.1"
    listen_port: int = 8765
    tick_rate_hz: int = DEFAULT_TICK_RATE_HZ
    questions_path: str | None = None  # None = packaged default bank
    replay_path: str | None = None
    record_path: str | None = None
    live_feed: str = "stdin"  # "stdin" or "tcp:<port>"
    shuffle_answers: bool = True
    feedback_auto_advance_ms: int = DEFAULT_FEEDBACK_AUTO_ADVANCE_MS  # <= 0 disables
    window_size: int = DEFAULT_WINDOW_SIZE
    d_max_m: float = DEFAULT_D_MAX_M
    walk_speed_mps: float = DEFAULT_WALK_SPEED_MPS
    ui_dir: str = DEFAULT_UI_DIR
    room: RoomModel = field(default_factory=make_room)
    policy: SelectionPolicy = field(default_factory=SelectionPolicy)

    @property
    def listen(self) -> str:
        return f"{self.listen_host}:{self.listen_port}"

    @property
    def tick_ms(self) -> int:
        return round(1000 / self.tick_rate_hz)


_KNOWN_KEYS = {
    "mode", "seed", "listen", "tick_rate_hz", "questions_path", "replay_path",
    "record_path", "live_feed", "shuffle_answers", "feedback_auto_advance_ms",
    "window_size", "d_max_m", "walk_speed_mps", "ui_dir", "room", "policy",
}
_KNOWN_ROOM_KEYS = {"width", "depth", "propagation", "beacons", "corner_legend"}


def _require(cond: bool, path: str, reason: str) -> None:
    if not cond:
        raise ConfigError(path, reason)


def _as_number(value: Any, path: str) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             path, f"expected a number, got {value!r}")
    return float(value)


def _as_int(value: Any, path: str) -> int:
    _require(isinstance(value, int) and not isinstance(value, bool),
             path, f"expected an integer, got {value!r}")
    return value


def _as_bool(value: Any, path: str) -> bool:
    _require(isinstance(value, bool), path, f"expected a boolean, got {value!r}")
    return value


def _as_str(value: Any, path: str) -> str:
    _require(isinstance(value, str), path, f"expected a string, got {value!r}")
    return value


def _parse_listen(value: Any) -> tuple[str, int]:
    text = _as_str(value, "listen")
    host, sep, port = text.rpartition(":")
    _require(bool(sep) and bool(host), "listen", f"expected 'host:port', got {text!r}")
    try:
        port_num = int(port)
    except ValueError:
        raise ConfigError("listen", f"port must be an integer, got {port!r}") from None
    _require(0 <= port_num <= 65535, "listen", f"port out of range: {port_num}")
    return host, port_num


def _parse_propagation(raw: Any, path: str) -> PropagationParams:
    _require(isinstance(raw, dict), path, "expected an object")
    kwargs = {}
    for key, attr in (
        ("path_loss_exponent", "path_loss_exponent"),
        ("noise_sigma_db", "noise_sigma_db"),
        ("d_min_m", "d_min_m"),
    ):
        if key in raw:
            kwargs[attr] = _as_number(raw[key], f"{path}.{key}")
    unknown = set(raw) - {"path_loss_exponent", "noise_sigma_db", "d_min_m"}
    _require(not unknown, path, f"unknown keys: {sorted(unknown)}")
    try:
        return PropagationParams(**kwargs)
    except ValueError as e:
        raise ConfigError(path, str(e)) from e


def _parse_room(raw: Any) -> RoomModel:
    _require(isinstance(raw, dict), "room", "expected an object")
    unknown = set(raw) - _KNOWN_ROOM_KEYS
    _require(not unknown, "room", f"unknown keys: {sorted(unknown)}")
    width = _as_number(raw.get("width", 6.0), "room.width")
    depth = _as_number(raw.get("depth", 6.0), "room.depth")
    propagation = _parse_propagation(raw.get("propagation", {}), "room.propagation")

    uuids = list(DEFAULT_BEACON_UUIDS)
    tx_powers = [DEFAULT_TX_POWER_1M_DBM] * 4
    intervals = [DEFAULT_ADVERTISE_INTERVAL_MS] * 4
    if "beacons" in raw:
        beacons_raw = raw["beacons"]
        _require(isinstance(beacons_raw, list) and len(beacons_raw) == 4,
                 "room.beacons", "expected an array of 4 beacon objects")
        for i, b in enumerate(beacons_raw):
            path = f"room.beacons[{i}]"
            _require(isinstance(b, dict), path, "expected an object")
            k = _as_int(b.get("id", i), f"{path}.id")
            _require(0 <= k <= 3, f"{path}.id", f"must be 0-3, got {k}")
            if "uuid" in b:
                uuids[k] = _as_str(b["uuid"], f"{path}.uuid")
            if "tx_power_1m_dbm" in b:
                tx_powers[k] = _as_number(b["tx_power_1m_dbm"], f"{path}.tx_power_1m_dbm")
            if "advertise_interval_ms" in b:
                intervals[k] = _as_int(b["advertise_interval_ms"], f"{path}.advertise_interval_ms")

    legend = list(DEFAULT_CORNER_LEGEND)
    if "corner_legend" in raw:
        legend_raw = raw["corner_legend"]
        _require(isinstance(legend_raw, list) and len(legend_raw) == 4,
                 "room.corner_legend", "expected an array of 4 entries")
        for i, entry in enumerate(legend_raw):
            path = f"room.corner_legend[{i}]"
            _require(isinstance(entry, dict), path, "expected an object")
            legend[i] = CornerLegend(
                color=_as_str(entry.get("color", legend[i].color), f"{path}.color"),
                number=_as_int(entry.get("number", legend[i].number), f"{path}.number"),
            )

    try:
        room = make_room(
            width=width,
            depth=depth,
            propagation=propagation,
            uuids=uuids,
            corner_legend=tuple(legend),
        )
    except ValueError as e:
        raise ConfigError("room", str(e)) from e
    # per-beacon radio overrides
    if any(tx != DEFAULT_TX_POWER_1M_DBM for tx in tx_powers) or any(
        iv != DEFAULT_ADVERTISE_INTERVAL_MS for iv in intervals
    ):
        beacons = tuple(
            replace(b, tx_power_1m_dbm=tx_powers[b.id], advertise_interval_ms=intervals[b.id])
            for b in room.beacons
        )
        room = replace(room, beacons=beacons)
    return room


def _parse_policy(raw: Any) -> SelectionPolicy:
    _require(isinstance(raw, dict), "policy", "expected an object")
    known = {"enter_threshold_m", "exit_threshold_m", "min_confidence", "centroid_exponent"}
    unknown = set(raw) - known
    _require(not unknown, "policy", f"unknown keys: {sorted(unknown)}")
    kwargs = {key: _as_number(raw[key], f"policy.{key}") for key in known if key in raw}
    try:
        return SelectionPolicy(**kwargs)
    except ValueError as e:
        raise ConfigError("policy", str(e)) from e


def config_from_dict(data: dict, base_dir: str | None = None) -> AppConfig:
    """Build a validated AppConfig; relative paths resolve against base_dir."""
    _require(isinstance(data, dict), "config", "expected a JSON object")
    unknown = set(data) - _KNOWN_KEYS
    _require(not unknown, "config", f"unknown keys: {sorted(unknown)}")

    mode = _as_str(data.get("mode", "sim"), "mode")
    _require(mode in MODES, "mode", f"must be one of {MODES}, got {mode!r}")

    def resolve(p: str | None) -> str | None:
        if p is None or base_dir is None or os.path.isabs(p):
            return p
        return os.path.normpath(os.path.join(base_dir, p))

    listen_host, listen_port = _parse_listen(data.get("listen", DEFAULT_LISTEN))
    tick_rate_hz = _as_int(data.get("tick_rate_hz", DEFAULT_TICK_RATE_HZ), "tick_rate_hz")
    _require(1 <= tick_rate_hz <= 100, "tick_rate_hz", f"must be within [1, 100], got {tick_rate_hz}")

    window_size = _as_int(data.get("window_size", DEFAULT_WINDOW_SIZE), "window_size")
    _require(window_size >= 1, "window_size", f"must be >= 1, got {window_size}")

    replay_path = data.get("replay_path")
    if replay_path is not None:
        replay_path = _as_str(replay_path, "replay_path")
    _require(mode != "replay" or replay_path is not None,
             "replay_path", "required when mode is 'replay'")

    questions_path = data.get("questions_path")
    if questions_path is not None:
        questions_path = _as_str(questions_path, "questions_path")
    record_path = data.get("record_path")
    if record_path is not None:
        record_path = _as_str(record_path, "record_path")

    live_feed = _as_str(data.get("live_feed", "stdin"), "live_feed")
    _require(live_feed == "stdin" or live_feed.startswith("tcp:"),
             "live_feed", f"expected 'stdin' or 'tcp:<port>', got {live_feed!r}")

    seed = _as_int(data.get("seed", 0), "seed")
    d_max_m = _as_number(data.get("d_max_m", DEFAULT_D_MAX_M), "d_max_m")
    _require(d_max_m > 0, "d_max_m", "must be > 0")
    walk_speed = _as_number(data.get("walk_speed_mps", DEFAULT_WALK_SPEED_MPS), "walk_speed_mps")
    _require(walk_speed > 0, "walk_speed_mps", "must be > 0")

    auto_advance = _as_int(
        data.get("feedback_auto_advance_ms", DEFAULT_FEEDBACK_AUTO_ADVANCE_MS),
        "feedback_auto_advance_ms",
    )

    return AppConfig(
        mode=mode,
        seed=seed,
        listen_host=listen_host,
        listen_port=listen_port,
        tick_rate_hz=tick_rate_hz,
        questions_path=resolve(questions_path),
        replay_path=resolve(replay_path),
        record_path=resolve(record_path),
        live_feed=live_feed,
        shuffle_answers=_as_bool(data.get("shuffle_answers", True), "shuffle_answers"),
        feedback_auto_advance_ms=auto_advance,
        window_size=window_size,
        d_max_m=d_max_m,
        walk_speed_mps=walk_speed,
        ui_dir=_as_str(data.get("ui_dir", DEFAULT_UI_DIR), "ui_dir"),
        room=_parse_room(data.get("room", {})),
        policy=_parse_policy(data.get("policy", {})),
    )


def load_config(path: str) -> AppConfig:
    """Read and validate a JSON config file."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"invalid JSON in {path}: {e}") from e
    return config_from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))


def dump_config(config: AppConfig) -> dict:
    """Full dict form; config_from_dict(dump_config(c)) == c."""
    return {
        "mode": config.mode,
        "seed": config.seed,
        "listen": config.listen,
        "tick_rate_hz": config.tick_rate_hz,
        "questions_path": config.questions_path,
        "replay_path": config.replay_path,
        "record_path": config.record_path,
        "live_feed": config.live_feed,
        "shuffle_answers": config.shuffle_answers,
        "feedback_auto_advance_ms": config.feedback_auto_advance_ms,
        "window_size": config.window_size,
        "d_max_m": config.d_max_m,
        "walk_speed_mps": config.walk_speed_mps,
        "ui_dir": config.ui_dir,
        "room": {
            "width": config.room.width,
            "depth": config.room.depth,
            "propagation": {
                "path_loss_exponent": config.room.propagation.path_loss_exponent,
                "noise_sigma_db": config.room.propagation.noise_sigma_db,
                "d_min_m": config.room.propagation.d_min_m,
            },
            "beacons": [
                {
                    "id": b.id,
                    "uuid": b.uuid,
                    "tx_power_1m_dbm": b.tx_power_1m_dbm,
                    "advertise_interval_ms": b.advertise_interval_ms,
                }
                for b in config.room.beacons
            ],
            "corner_legend": [
                {"color": c.color, "number": c.number} for c in config.room.corner_legend
            ],
        },
        "policy": {
            "enter_threshold_m": config.policy.enter_threshold_m,
            "exit_threshold_m": config.policy.exit_threshold_m,
            "min_confidence": config.policy.min_confidence,
            "centroid_exponent": config.policy.centroid_exponent,
        },
    }


def sanitized_config(config: AppConfig, question_count: int, ladder: tuple[str, ...]) -> dict:
    """Public view served at GET /config: no paths, no answer data."""
    return {
        "mode": config.mode,
        "tick_rate_hz": config.tick_rate_hz,
        "window_size": config.window_size,
        "shuffle_answers": config.shuffle_answers,
        "room": {
            "width": config.room.width,
            "depth": config.room.depth,
        },
        "corners": [
            {
                "corner": k,
                "name": CORNER_NAMES[k],
                "color": config.room.corner_legend[k].color,
                "number": config.room.corner_legend[k].number,
            }
            for k in range(4)
        ],
        "policy": {
            "enter_threshold_m": config.policy.enter_threshold_m,
            "exit_threshold_m": config.policy.exit_threshold_m,
        },
        "question_count": question_count,
        "ladder": list(ladder),
    }
