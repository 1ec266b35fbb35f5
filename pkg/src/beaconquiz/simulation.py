"""Virtual beacon room: log-distance RSSI model and broadcast scheduling.

Stands in for the physical hardware: four corner beacons periodically
broadcast identifiers, and the received signal strength at the player's
position follows a log-distance path-loss curve with optional Gaussian
noise in dB. Everything is deterministic given a seeded random source.

Coordinates are meters in a top-view plan: x grows west to east, y grows
north to south (screen-style), so corner 0 is the north-west corner at
(0, 0) and corner 3 is the south-east corner at (width, depth).
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

Point = tuple[float, float]
PathPoint = tuple[int, Point]  # (ts_ms, position)

CORNER_COUNT = 4
CORNER_NAMES = ("NW", "NE", "SW", "SE")

DEFAULT_TX_POWER_1M_DBM = -59.0
DEFAULT_PATH_LOSS_EXPONENT = 2.0
DEFAULT_NOISE_SIGMA_DB = 2.0
DEFAULT_D_MIN_M = 0.1
DEFAULT_ADVERTISE_INTERVAL_MS = 100

DEFAULT_BEACON_UUIDS = (
    "3f9a1c2e-0b6d-4e8f-9a01-5c2d7e400001",
    "3f9a1c2e-0b6d-4e8f-9a01-5c2d7e400002",
    "3f9a1c2e-0b6d-4e8f-9a01-5c2d7e400003",
    "3f9a1c2e-0b6d-4e8f-9a01-5c2d7e400004",
)

_UUID_RE = re.compile(
    r"^[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}$"
)


@dataclass(frozen=True)
class CornerLegend:
    """Display code for one corner: a color name and a 1-based number."""

    color: str
    number: int


DEFAULT_CORNER_LEGEND = (
    CornerLegend("blue", 1),
    CornerLegend("red", 2),
    CornerLegend("green", 3),
    CornerLegend("yellow", 4),
)


@dataclass(frozen=True)
class BeaconSpec:
    """One corner-mounted transmitter.

    ``tx_power_1m_dbm`` is the calibrated received power at 1 m; any
    reflector or antenna gain is assumed folded into it.
    """

    id: int
    uuid: str
    position: Point
    tx_power_1m_dbm: float = DEFAULT_TX_POWER_1M_DBM
    advertise_interval_ms: int = DEFAULT_ADVERTISE_INTERVAL_MS

    def __post_init__(self):
        if not 0 <= self.id < CORNER_COUNT:
            raise ValueError(f"beacon id must be 0-3, got {self.id}")
        if not _UUID_RE.match(self.uuid):
            raise ValueError(f"beacon uuid not in canonical 8-4-4-4-12 form: {self.uuid!r}")
        if self.advertise_interval_ms <= 0:
            raise ValueError("advertise_interval_ms must be > 0")


@dataclass(frozen=True)
class PropagationParams:
    """Log-distance channel parameters.

    ``d_min_m`` clamps the modeled distance away from the log singularity
    at the beacon itself.
    """

    path_loss_exponent: float = DEFAULT_PATH_LOSS_EXPONENT
    noise_sigma_db: float = DEFAULT_NOISE_SIGMA_DB
    d_min_m: float = DEFAULT_D_MIN_M

    def __post_init__(self):
        if self.path_loss_exponent <= 0:
            raise ValueError("path_loss_exponent must be > 0")
        if self.noise_sigma_db < 0:
            raise ValueError("noise_sigma_db must be >= 0")
        if self.d_min_m <= 0:
            raise ValueError("d_min_m must be > 0")


def corner_positions(width: float, depth: float) -> tuple[Point, Point, Point, Point]:
    """Corner coordinates in fixed order: 0=NW, 1=NE, 2=SW, 3=SE."""
    return ((0.0, 0.0), (width, 0.0), (0.0, depth), (width, depth))


@dataclass(frozen=True)
class RoomModel:
    """Rectangular room with one beacon in each corner."""

    width: float
    depth: float
    beacons: tuple[BeaconSpec, ...]
    propagation: PropagationParams = field(default_factory=PropagationParams)
    corner_legend: tuple[CornerLegend, ...] = DEFAULT_CORNER_LEGEND

    def __post_init__(self):
        if not (2.0 <= self.width <= 50.0 and 2.0 <= self.depth <= 50.0):
            raise ValueError("room width and depth must be within [2, 50] m")
        if len(self.beacons) != CORNER_COUNT:
            raise ValueError(f"expected exactly {CORNER_COUNT} beacons")
        if sorted(b.id for b in self.beacons) != list(range(CORNER_COUNT)):
            raise ValueError("beacon ids must be exactly 0, 1, 2, 3")
        if len({b.uuid for b in self.beacons}) != CORNER_COUNT:
            raise ValueError("beacon uuids must be distinct")
        corners = corner_positions(self.width, self.depth)
        for b in self.beacons:
            if b.position != corners[b.id]:
                raise ValueError(
                    f"beacon {b.id} must sit at corner {CORNER_NAMES[b.id]} "
                    f"{corners[b.id]}, got {b.position}"
                )
        if len(self.corner_legend) != CORNER_COUNT:
            raise ValueError("corner_legend must cover all four corners")

    def beacon(self, beacon_id: int) -> BeaconSpec:
        for b in self.beacons:
            if b.id == beacon_id:
                return b
        raise ValueError(f"no beacon with id {beacon_id}")

    def contains(self, p: Point) -> bool:
        return 0.0 <= p[0] <= self.width and 0.0 <= p[1] <= self.depth

    @property
    def center(self) -> Point:
        return (self.width / 2.0, self.depth / 2.0)

    def to_normalized(self, p: Point) -> Point:
        return (p[0] / self.width, p[1] / self.depth)

    def from_normalized(self, p: Point) -> Point:
        return (p[0] * self.width, p[1] * self.depth)


def make_room(
    width: float = 6.0,
    depth: float = 6.0,
    propagation: PropagationParams | None = None,
    uuids: Sequence[str] = DEFAULT_BEACON_UUIDS,
    tx_power_1m_dbm: float = DEFAULT_TX_POWER_1M_DBM,
    advertise_interval_ms: int = DEFAULT_ADVERTISE_INTERVAL_MS,
    corner_legend: tuple[CornerLegend, ...] = DEFAULT_CORNER_LEGEND,
) -> RoomModel:
    """Build a room with identically configured beacons in all corners."""
    corners = corner_positions(width, depth)
    beacons = tuple(
        BeaconSpec(
            id=k,
            uuid=uuids[k],
            position=corners[k],
            tx_power_1m_dbm=tx_power_1m_dbm,
            advertise_interval_ms=advertise_interval_ms,
        )
        for k in range(CORNER_COUNT)
    )
    return RoomModel(
        width=width,
        depth=depth,
        beacons=beacons,
        propagation=propagation or PropagationParams(),
        corner_legend=corner_legend,
    )


@dataclass(frozen=True)
class RssiSample:
    """One received advertisement."""

    beacon_id: int
    uuid: str
    rssi_dbm: float
    ts_ms: int


def rssi_at(
    room: RoomModel,
    beacon_id: int,
    player: Point,
    rng: random.Random | None = None,
) -> float:
    """Received power in dBm at the player's position.

    Log-distance model: tx_power_1m - 10*n*log10(max(d, d_min) / 1 m),
    plus Gaussian noise in dB when the room's noise_sigma_db is nonzero.
    The rng is only consulted when noise is enabled.
    """
    if not 0 <= beacon_id < CORNER_COUNT:
        raise ValueError(f"beacon_id must be 0-3, got {beacon_id}")
    if not room.contains(player):
        raise ValueError(f"player position {player} outside room bounds")
    beacon = room.beacon(beacon_id)
    params = room.propagation
    d = math.hypot(player[0] - beacon.position[0], player[1] - beacon.position[1])
    d = max(d, params.d_min_m)
    rssi = beacon.tx_power_1m_dbm - 10.0 * params.path_loss_exponent * math.log10(d)
    if params.noise_sigma_db > 0:
        if rng is None:
            raise ValueError("rng required when noise_sigma_db > 0")
        rssi += rng.gauss(0.0, params.noise_sigma_db)
    return rssi


def position_on_path(path: Sequence[PathPoint], ts_ms: int) -> Point:
    """Linear interpolation along timestamped waypoints, clamped at the ends."""
    if not path:
        raise ValueError("path must contain at least one waypoint")
    if ts_ms <= path[0][0]:
        return path[0][1]
    if ts_ms >= path[-1][0]:
        return path[-1][1]
    for (t0, p0), (t1, p1) in zip(path, path[1:]):
        if t0 <= ts_ms <= t1:
            if t1 == t0:
                return p1
            frac = (ts_ms - t0) / (t1 - t0)
            return (p0[0] + frac * (p1[0] - p0[0]), p0[1] + frac * (p1[1] - p0[1]))
    return path[-1][1]


class BeaconSimulator:
    """Pull-driven advertisement generator.

    Each beacon broadcasts every ``advertise_interval_ms``, with the first
    emission one full interval after the clock start; ``advance`` produces
    every emission in (current clock, until] ordered by timestamp, ties
    broken by beacon id.
    """

    def __init__(self, room: RoomModel, rng: random.Random | None = None, start_ms: int = 0):
        self.room = room
        self._rng = rng
        self._clock_ms = start_ms
        self._last_emit = {b.id: start_ms for b in room.beacons}

    @property
    def clock_ms(self) -> int:
        return self._clock_ms

    def advance(self, path: Sequence[PathPoint], until_ms: int) -> list[RssiSample]:
        """Emit all samples up to and including ``until_ms``.

        The player position at each emission instant is interpolated
        linearly along ``path``.
        """
        if until_ms < self._clock_ms:
            raise ValueError(
                f"until_ms {until_ms} is before current clock {self._clock_ms}"
            )
        emissions: list[tuple[int, int]] = []
        for b in self.room.beacons:
            t = self._last_emit[b.id] + b.advertise_interval_ms
            while t <= until_ms:
                emissions.append((t, b.id))
                self._last_emit[b.id] = t
                t += b.advertise_interval_ms
        emissions.sort()
        samples = []
        for ts, beacon_id in emissions:
            pos = position_on_path(path, ts)
            rssi = rssi_at(self.room, beacon_id, pos, self._rng)
            samples.append(
                RssiSample(
                    beacon_id=beacon_id,
                    uuid=self.room.beacon(beacon_id).uuid,
                    rssi_dbm=rssi,
                    ts_ms=ts,
                )
            )
        self._clock_ms = until_ms
        return samples


def sample_to_json(sample: RssiSample) -> str:
    return json.dumps(
        {
            "ts_ms": sample.ts_ms,
            "beacon_id": sample.beacon_id,
            "uuid": sample.uuid,
            "rssi_dbm": sample.rssi_dbm,
        },
        separators=(",", ":"),
    )


def write_scan_log(samples: Iterable[RssiSample], sink: IO[str]) -> None:
    """Write samples as NDJSON, one per line, LF-terminated.

    Samples must already be ordered by timestamp.
    """
    last_ts = None
    for s in samples:
        if last_ts is not None and s.ts_ms < last_ts:
            raise ValueError("samples must be timestamp-ordered")
        last_ts = s.ts_ms
        sink.write(sample_to_json(s))
        sink.write("\n")


def save_scan_log(samples: Iterable[RssiSample], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        write_scan_log(samples, f)
