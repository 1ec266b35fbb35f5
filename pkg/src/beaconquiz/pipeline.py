"""Per-beacon RSSI smoothing and distance estimation.

Each beacon gets an independent sliding window holding the last ten
received values; the window mean is inverted through the log-distance
model to a distance estimate. A burst from one beacon never evicts
another beacon's history.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

from .simulation import CORNER_COUNT, PropagationParams, RoomModel, RssiSample

DEFAULT_WINDOW_SIZE = 10  # last ten broadcasts
DEFAULT_D_MAX_M = 50.0
DEFAULT_STALE_AFTER_MS = 2000

_SCAN_FIELDS = ("ts_ms", "beacon_id", "uuid", "rssi_dbm")


class ScanLogError(ValueError):
    """Malformed scan-log line; carries the 1-based line number."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class NoDataError(ValueError):
    """Distance requested from an empty filter window."""


@dataclass
class FilterState:
    """Sliding window of the most recent RSSI values for one beacon."""

    beacon_id: int
    window_size: int = DEFAULT_WINDOW_SIZE
    last_ts_ms: int | None = None

    def __post_init__(self):
        if self.window_size < 1:
            raise ValueError("window_size must be >= 1")
        self.window: deque[float] = deque(maxlen=self.window_size)

    def push(self, rssi_dbm: float, ts_ms: int) -> None:
        self.window.append(rssi_dbm)  # deque evicts oldest-first when full
        self.last_ts_ms = ts_ms

    def clear(self) -> None:
        self.window.clear()
        self.last_ts_ms = None

    def snapshot(self) -> FilteredSignal:
        count = len(self.window)
        mean = sum(self.window) / count if count else None
        return FilteredSignal(
            beacon_id=self.beacon_id,
            mean_rssi_dbm=mean,
            sample_count=count,
            last_ts_ms=self.last_ts_ms,
            window_size=self.window_size,
        )


@dataclass(frozen=True)
class FilteredSignal:
    """Window mean for one beacon at a moment in time."""

    beacon_id: int
    mean_rssi_dbm: float | None
    sample_count: int
    last_ts_ms: int | None
    window_size: int = DEFAULT_WINDOW_SIZE


@dataclass(frozen=True)
class DistanceEstimate:
    beacon_id: int
    distance_m: float
    confidence: float  # filled fraction of the window, 0 when stale


class SignalPipeline:
    """Owns the four per-beacon windows; rejects bad samples and counts them.

    Rejections are not fatal: a sample with an unknown uuid (or a uuid
    that does not match its beacon id) bumps the ``unknown_beacon``
    counter, and a timestamp moving backwards for a beacon bumps
    ``out_of_order``.
    """

    def __init__(self, room: RoomModel, window_size: int = DEFAULT_WINDOW_SIZE):
        self.room = room
        self.window_size = window_size
        self._states = {
            b.id: FilterState(b.id, window_size) for b in room.beacons
        }
        self._uuid_by_id = {b.id: b.uuid for b in room.beacons}
        self.rejected = {"unknown_beacon": 0, "out_of_order": 0}

    def push(self, sample: RssiSample) -> FilteredSignal | None:
        """Feed one sample; returns the updated signal, or None if rejected."""
        state = self._states.get(sample.beacon_id)
        if state is None or self._uuid_by_id[sample.beacon_id] != sample.uuid:
            self.rejected["unknown_beacon"] += 1
            return None
        if state.last_ts_ms is not None and sample.ts_ms < state.last_ts_ms:
            self.rejected["out_of_order"] += 1
            return None
        state.push(sample.rssi_dbm, sample.ts_ms)
        return state.snapshot()

    def signal(self, beacon_id: int) -> FilteredSignal:
        return self._states[beacon_id].snapshot()

    def signals(self) -> list[FilteredSignal]:
        """Current signals in beacon-id order."""
        return [self._states[k].snapshot() for k in range(CORNER_COUNT)]

    def reset(self) -> None:
        """Empty every window and zero the rejection counters (new round)."""
        for state in self._states.values():
            state.clear()
        for key in self.rejected:
            self.rejected[key] = 0


def estimate_distance(
    signal: FilteredSignal,
    params: PropagationParams,
    tx_power_1m_dbm: float,
    d_max_m: float = DEFAULT_D_MAX_M,
) -> DistanceEstimate:
    """Invert the filtered mean through the path-loss model.

    d = 10 ** ((tx_power_1m - mean_rssi) / (10 * n)), clamped to
    [d_min, d_max]. Monotone: a weaker mean never yields a smaller
    distance.
    """
    if signal.sample_count == 0 or signal.mean_rssi_dbm is None:
        raise NoDataError(f"beacon {signal.beacon_id}: empty filter window")
    exponent = (tx_power_1m_dbm - signal.mean_rssi_dbm) / (
        10.0 * params.path_loss_exponent
    )
    distance = 10.0 ** exponent
    distance = min(max(distance, params.d_min_m), d_max_m)
    confidence = signal.sample_count / signal.window_size
    return DistanceEstimate(
        beacon_id=signal.beacon_id, distance_m=distance, confidence=confidence
    )


def is_stale(
    signal: FilteredSignal, now_ms: int, stale_after_ms: int = DEFAULT_STALE_AFTER_MS
) -> bool:
    """A beacon not heard from within the stale window counts as lost."""
    if signal.last_ts_ms is None:
        return True
    return now_ms - signal.last_ts_ms > stale_after_ms


def parse_scan_line(line: str, line_no: int) -> RssiSample:
    """Parse one NDJSON scan-log line; raises ScanLogError on any defect.

    Unknown beacon ids and uuids pass through so the pipeline can count
    them; only structural problems are errors here.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise ScanLogError(line_no, f"invalid JSON: {e.msg}") from e
    if not isinstance(obj, dict):
        raise ScanLogError(line_no, "expected a JSON object")
    for key in _SCAN_FIELDS:
        if key not in obj:
            raise ScanLogError(line_no, f"missing field {key!r}")
    ts = obj["ts_ms"]
    beacon_id = obj["beacon_id"]
    uuid = obj["uuid"]
    rssi = obj["rssi_dbm"]
    if not isinstance(ts, int) or isinstance(ts, bool):
        raise ScanLogError(line_no, "ts_ms must be an integer")
    if not isinstance(beacon_id, int) or isinstance(beacon_id, bool):
        raise ScanLogError(line_no, "beacon_id must be an integer")
    if not isinstance(uuid, str):
        raise ScanLogError(line_no, "uuid must be a string")
    if not isinstance(rssi, (int, float)) or isinstance(rssi, bool) or not math.isfinite(rssi):
        raise ScanLogError(line_no, "rssi_dbm must be a finite number")
    return RssiSample(beacon_id=beacon_id, uuid=uuid, rssi_dbm=float(rssi), ts_ms=ts)


def read_scan_log(source: IO[str] | Iterable[str]) -> Iterator[RssiSample]:
    """Yield samples from an NDJSON stream in file order.

    Blank lines are skipped; anything else that fails to parse raises a
    ScanLogError naming the offending line.
    """
    for line_no, line in enumerate(source, start=1):
        if not line.strip():
            continue
        yield parse_scan_line(line, line_no)


def load_scan_log(path: str) -> list[RssiSample]:
    with open(path, "r", encoding="utf-8") as f:
        return list(read_scan_log(f))
