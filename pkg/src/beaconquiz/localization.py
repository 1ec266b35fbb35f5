"""Corner selection and position estimation from per-beacon distances.

Selection uses a hysteresis pair of thresholds: a beacon must come
closer than the entry threshold to become selected, and the selection is
only released once its distance exceeds the (larger) exit threshold, so
noise near a single boundary cannot make the highlighted answer flicker.

The on-screen position is a distance-weighted centroid of the four
corners, in normalized room coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import pipeline
from .pipeline import DEFAULT_D_MAX_M, DEFAULT_STALE_AFTER_MS, DistanceEstimate, FilteredSignal
from .simulation import CORNER_COUNT, Point, RoomModel

CENTER: Point = (0.5, 0.5)

# Corner coordinates in the normalized unit square, same order as beacon ids.
NORMALIZED_CORNERS: tuple[Point, ...] = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0))


@dataclass(frozen=True)
class SelectionPolicy:
    enter_threshold_m: float = 1.5
    exit_threshold_m: float = 2.2
    min_confidence: float = 0.5
    centroid_exponent: float = 2.0

    def __post_init__(self):
        if not 0 < self.enter_threshold_m < self.exit_threshold_m:
            raise ValueError("thresholds must satisfy 0 < enter < exit")
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValueError("min_confidence must be within [0, 1]")
        if self.centroid_exponent <= 0:
            raise ValueError("centroid_exponent must be > 0")


@dataclass(frozen=True)
class CornerSelection:
    """Currently selected corner, if any, and when it took effect."""

    selected: int | None = None
    since_ms: int = 0


NO_SELECTION = CornerSelection()


@dataclass(frozen=True)
class LocalizationFrame:
    distances: tuple[DistanceEstimate, ...]  # all four beacons, id order
    selection: CornerSelection
    position: Point  # normalized [0,1] x [0,1]
    ts_ms: int


def _candidates(
    distances: Sequence[DistanceEstimate], policy: SelectionPolicy
) -> list[DistanceEstimate]:
    return [
        d
        for d in distances
        if d.distance_m < policy.enter_threshold_m
        and d.confidence >= policy.min_confidence
    ]


def select_corner(
    distances: Sequence[DistanceEstimate],
    policy: SelectionPolicy,
    previous: CornerSelection,
    now_ms: int,
) -> CornerSelection:
    """Apply the entry/exit threshold rules to the four distances.

    Entry: among beacons closer than the entry threshold with enough
    confidence, the smallest distance wins, ties going to the lowest
    corner index. A held selection persists while its distance stays
    under the exit threshold and is only displaced by a candidate that
    is strictly closer.
    """
    if len(distances) != CORNER_COUNT:
        raise ValueError(f"expected {CORNER_COUNT} distance estimates")
    by_id = {d.beacon_id: d for d in distances}
    candidates = _candidates(distances, policy)
    best = min(candidates, key=lambda d: (d.distance_m, d.beacon_id)) if candidates else None

    held = previous.selected
    if held is None:
        chosen = best.beacon_id if best else None
    else:
        held_distance = by_id[held].distance_m
        if held_distance < policy.exit_threshold_m:
            chosen = held
            if best and best.beacon_id != held and best.distance_m < held_distance:
                chosen = best.beacon_id
        else:
            chosen = best.beacon_id if best else None

    if chosen == previous.selected:
        return previous
    return CornerSelection(selected=chosen, since_ms=now_ms)


def estimate_position(
    distances: Sequence[DistanceEstimate],
    room: RoomModel,
    policy: SelectionPolicy,
) -> Point | None:
    """Weighted centroid of the corners, weights 1 / max(d, d_min)^g.

    Returns None when any beacon has zero confidence; the caller keeps
    the previous position in that case.
    """
    if len(distances) != CORNER_COUNT:
        raise ValueError(f"expected {CORNER_COUNT} distance estimates")
    if any(d.confidence <= 0.0 for d in distances):
        return None
    d_min = room.propagation.d_min_m
    g = policy.centroid_exponent
    wx = wy = wsum = 0.0
    for d in distances:
        corner = NORMALIZED_CORNERS[d.beacon_id]
        w = 1.0 / max(d.distance_m, d_min) ** g
        wx += w * corner[0]
        wy += w * corner[1]
        wsum += w
    x = min(max(wx / wsum, 0.0), 1.0)
    y = min(max(wy / wsum, 0.0), 1.0)
    return (x, y)


def tick(
    signals: Sequence[FilteredSignal],
    room: RoomModel,
    policy: SelectionPolicy,
    previous: LocalizationFrame | None,
    now_ms: int,
    d_max_m: float = DEFAULT_D_MAX_M,
    stale_after_ms: int = DEFAULT_STALE_AFTER_MS,
) -> LocalizationFrame:
    """Build one localization frame from the current filtered signals.

    Beacons with empty windows (or none heard within the stale window)
    contribute a zero-confidence placeholder at d_max; the player icon
    starts at the room center and holds its last position whenever any
    beacon lacks data.
    """
    if previous is not None and now_ms < previous.ts_ms:
        raise ValueError("now_ms must not precede the previous frame")
    estimates = []
    for signal in sorted(signals, key=lambda s: s.beacon_id):
        beacon = room.beacon(signal.beacon_id)
        if signal.sample_count == 0:
            est = DistanceEstimate(signal.beacon_id, d_max_m, 0.0)
        else:
            est = pipeline.estimate_distance(
                signal, room.propagation, beacon.tx_power_1m_dbm, d_max_m
            )
            if pipeline.is_stale(signal, now_ms, stale_after_ms):
                est = DistanceEstimate(est.beacon_id, est.distance_m, 0.0)
        estimates.append(est)

    prev_selection = previous.selection if previous else NO_SELECTION
    selection = select_corner(estimates, policy, prev_selection, now_ms)
    position = estimate_position(estimates, room, policy)
    if position is None:
        position = previous.position if previous else CENTER
    return LocalizationFrame(
        distances=tuple(estimates),
        selection=selection,
        position=position,
        ts_ms=now_ms,
    )
