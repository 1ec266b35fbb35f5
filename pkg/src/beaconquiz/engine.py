"""Deterministic tick engine wiring simulator, pipeline, localization, game.

One engine tick advances the scenario clock by a fixed step, pulls the
samples that fell due, updates the filter and localization, applies any
client events, and emits a snapshot. Nothing in here reads the wall
clock, so a given (config, seed, recorded inputs) triple always produces
the same snapshot sequence, byte for byte.

Session logs are NDJSON: scan-sample lines in the shared format
interleaved with event lines {"ts_ms": N, "event": "...", ...}. A header
event line ("session_start") opens every recording.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import IO, Sequence

from . import game as quiz
from . import localization as loc
from .config import AppConfig
from .pipeline import ScanLogError, SignalPipeline, parse_scan_line
from .simulation import (
    BeaconSimulator,
    Point,
    RssiSample,
    sample_to_json,
)

GAME_EVENT_KINDS = ("confirm", "advance", "reset")
EVENT_KINDS = GAME_EVENT_KINDS + ("move",)

# Keeps the game rng stream distinct from the simulator's noise stream.
_GAME_SEED_SALT = 0x5EED_BA5E


@dataclass(frozen=True)
class ClientEvent:
    kind: str  # confirm | advance | reset | move
    x: float | None = None
    y: float | None = None


def snapshot_json(snapshot: dict) -> str:
    """Canonical JSON used everywhere a snapshot leaves the engine."""
    return json.dumps(snapshot, separators=(",", ":"), sort_keys=True)


class SessionRecorder:
    """Appends samples and events to an NDJSON session log."""

    def __init__(self, sink: IO[str], config: AppConfig):
        self._sink = sink
        header = {
            "ts_ms": 0,
            "event": "session_start",
            "mode": config.mode,
            "seed": config.seed,
            "tick_rate_hz": config.tick_rate_hz,
        }
        self._sink.write(json.dumps(header, separators=(",", ":")) + "\n")

    def record_sample(self, sample: RssiSample) -> None:
        self._sink.write(sample_to_json(sample) + "\n")

    def record_event(self, ts_ms: int, event: ClientEvent) -> None:
        obj: dict = {"ts_ms": ts_ms, "event": event.kind}
        if event.kind == "move":
            obj["x"] = event.x
            obj["y"] = event.y
        self._sink.write(json.dumps(obj, separators=(",", ":")) + "\n")

    def close(self) -> None:
        self._sink.close()


class SimSource:
    """Sim-mode sample source: virtual beacons plus a walking player.

    The player starts at the room center and walks toward the last move
    target at a constant speed; samples are generated along the actual
    path segment covered during each tick.
    """

    def __init__(self, config: AppConfig, rng: random.Random):
        self.room = config.room
        self.walk_speed_mps = config.walk_speed_mps
        self.simulator = BeaconSimulator(self.room, rng)
        self.position: Point = self.room.center
        self.target: Point | None = None

    def set_target(self, x_norm: float, y_norm: float) -> None:
        x = min(max(x_norm, 0.0), 1.0)
        y = min(max(y_norm, 0.0), 1.0)
        self.target = self.room.from_normalized((x, y))

    def poll(self, until_ms: int) -> list[RssiSample]:
        start_ms = self.simulator.clock_ms
        new_pos = self._walk(until_ms - start_ms)
        path = [(start_ms, self.position), (until_ms, new_pos)]
        samples = self.simulator.advance(path, until_ms)
        self.position = new_pos
        return samples

    def _walk(self, dt_ms: int) -> Point:
        if self.target is None or dt_ms <= 0:
            return self.position
        dx = self.target[0] - self.position[0]
        dy = self.target[1] - self.position[1]
        dist = math.hypot(dx, dy)
        step = self.walk_speed_mps * dt_ms / 1000.0
        if dist <= step or dist == 0.0:
            return self.target
        return (
            self.position[0] + dx / dist * step,
            self.position[1] + dy / dist * step,
        )


class ReplaySource:
    """Replays a recorded session log: samples plus game events by timestamp.

    The whole file is parsed up front so a truncated or malformed line
    fails fast with its line number. Recorded move events only ever
    steered the simulator, whose output is already in the log, so they
    are skipped here.
    """

    def __init__(self, lines: Sequence[str]):
        self.samples: list[RssiSample] = []
        self.events: list[tuple[int, ClientEvent]] = []
        for line_no, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ScanLogError(line_no, f"invalid JSON: {e.msg}") from e
            if isinstance(obj, dict) and "event" in obj:
                self._parse_event(obj, line_no)
            else:
                self.samples.append(parse_scan_line(line, line_no))
        self._sample_pos = 0
        self._event_pos = 0

    def _parse_event(self, obj: dict, line_no: int) -> None:
        kind = obj.get("event")
        ts = obj.get("ts_ms")
        if not isinstance(ts, int) or isinstance(ts, bool):
            raise ScanLogError(line_no, "event ts_ms must be an integer")
        if kind == "session_start":
            return
        if kind not in EVENT_KINDS:
            raise ScanLogError(line_no, f"unknown event kind {kind!r}")
        if kind == "move":
            return  # positions are already baked into the recorded samples
        self.events.append((ts, ClientEvent(kind=kind)))

    @classmethod
    def from_path(cls, path: str) -> "ReplaySource":
        with open(path, "r", encoding="utf-8") as f:
            return cls(f.readlines())

    def poll(self, until_ms: int) -> list[RssiSample]:
        out = []
        while (
            self._sample_pos < len(self.samples)
            and self.samples[self._sample_pos].ts_ms <= until_ms
        ):
            out.append(self.samples[self._sample_pos])
            self._sample_pos += 1
        return out

    def events_until(self, until_ms: int) -> list[ClientEvent]:
        out = []
        while (
            self._event_pos < len(self.events)
            and self.events[self._event_pos][0] <= until_ms
        ):
            out.append(self.events[self._event_pos][1])
            self._event_pos += 1
        return out

    @property
    def exhausted(self) -> bool:
        return self._sample_pos >= len(self.samples) and self._event_pos >= len(self.events)


class LiveFeedSource:
    """Buffer for externally fed samples (stdin or TCP scanner feed)."""

    def __init__(self):
        self._buffer: list[RssiSample] = []

    def feed(self, sample: RssiSample) -> None:
        self._buffer.append(sample)

    def feed_line(self, line: str, line_no: int = 0) -> None:
        self._buffer.append(parse_scan_line(line, line_no))

    def poll(self, until_ms: int) -> list[RssiSample]:
        out, self._buffer = self._buffer, []
        return out


class CoreEngine:
    """The single deterministic owner of pipeline, localization, and game state."""

    def __init__(
        self,
        config: AppConfig,
        bank: quiz.QuestionBank,
        source,
        recorder: SessionRecorder | None = None,
    ):
        self.config = config
        self.bank = bank
        self.source = source
        self.recorder = recorder
        self.clock_ms = 0
        self.tick_ms = config.tick_ms
        self.pipeline = SignalPipeline(config.room, config.window_size)
        self.frame: loc.LocalizationFrame | None = None
        self.game = quiz.IDLE_STATE
        self.game_rng = random.Random(config.seed ^ _GAME_SEED_SALT)
        self.seq = 0
        self.feedback_since_ms: int | None = None
        self.ignored_events = 0  # game events that were illegal when applied

    def tick(self, events: Sequence[ClientEvent] = ()) -> dict:
        """Advance one step and return the snapshot dict."""
        self.clock_ms += self.tick_ms

        # Moves steer the simulated player before samples are drawn.
        game_events = []
        for ev in events:
            if ev.kind == "move":
                if isinstance(self.source, SimSource) and ev.x is not None and ev.y is not None:
                    self.source.set_target(ev.x, ev.y)
                    self._record_event(ev)
            else:
                game_events.append(ev)

        for sample in self.source.poll(self.clock_ms):
            if self.recorder:
                self.recorder.record_sample(sample)
            self.pipeline.push(sample)

        if isinstance(self.source, ReplaySource):
            game_events = list(self.source.events_until(self.clock_ms)) + game_events

        self.frame = loc.tick(
            self.pipeline.signals(),
            self.config.room,
            self.config.policy,
            self.frame,
            self.clock_ms,
            d_max_m=self.config.d_max_m,
        )

        if self.game.phase == quiz.Phase.IDLE:
            self._transition(quiz.start_game(self.bank, self.game_rng, self.config.shuffle_answers))

        self._transition(quiz.apply_selection(self.game, self.frame.selection))

        for ev in game_events:
            self._apply_game_event(ev)

        self._maybe_auto_advance()

        self.seq += 1
        return self._build_snapshot()

    def _apply_game_event(self, ev: ClientEvent) -> None:
        if ev.kind not in GAME_EVENT_KINDS:
            return
        try:
            if ev.kind == "confirm":
                self._transition(quiz.confirm(self.game, self.bank))
            elif ev.kind == "advance":
                self._transition(
                    quiz.advance(self.game, self.bank, self.game_rng, self.config.shuffle_answers)
                )
            elif ev.kind == "reset":
                self._transition(quiz.reset_game(self.game))
                self.pipeline.reset()
                self.frame = loc.tick(
                    self.pipeline.signals(),
                    self.config.room,
                    self.config.policy,
                    None,
                    self.clock_ms,
                    d_max_m=self.config.d_max_m,
                )
        except quiz.IllegalTransition:
            self.ignored_events += 1
            return
        self._record_event(ev)

    def _transition(self, new_state: quiz.GameState) -> None:
        if new_state.phase == quiz.Phase.FEEDBACK and self.game.phase != quiz.Phase.FEEDBACK:
            self.feedback_since_ms = self.clock_ms
        elif new_state.phase != quiz.Phase.FEEDBACK:
            self.feedback_since_ms = None
        self.game = new_state

    def _maybe_auto_advance(self) -> None:
        auto_ms = self.config.feedback_auto_advance_ms
        if (
            auto_ms > 0
            and self.game.phase == quiz.Phase.FEEDBACK
            and self.feedback_since_ms is not None
            and self.clock_ms - self.feedback_since_ms >= auto_ms
        ):
            self._transition(
                quiz.advance(self.game, self.bank, self.game_rng, self.config.shuffle_answers)
            )

    def _record_event(self, ev: ClientEvent) -> None:
        if self.recorder:
            self.recorder.record_event(self.clock_ms, ev)

    def _build_snapshot(self) -> dict:
        frame = self.frame
        state = self.game
        beacons = []
        for est in frame.distances:
            signal = self.pipeline.signal(est.beacon_id)
            beacons.append(
                {
                    "beacon_id": est.beacon_id,
                    "mean_rssi_dbm": (
                        round(signal.mean_rssi_dbm, 2)
                        if signal.mean_rssi_dbm is not None
                        else None
                    ),
                    "distance_m": round(est.distance_m, 3),
                    "confidence": round(est.confidence, 2),
                }
            )

        question = None
        answers = None
        if state.phase in (
            quiz.Phase.QUESTION_SHOWN,
            quiz.Phase.ANSWER_HIGHLIGHTED,
            quiz.Phase.FEEDBACK,
        ):
            q = state.current_question(self.bank)
            question = {
                "index": state.question_index,
                "total": len(self.bank),
                "text": q.text,
            }
            answers = [
                {
                    "corner": corner,
                    "text": q.answers[state.answers_mapping[corner]],
                    "color": self.config.room.corner_legend[corner].color,
                    "number": self.config.room.corner_legend[corner].number,
                }
                for corner in range(4)
            ]

        feedback = None
        if state.phase == quiz.Phase.FEEDBACK:
            feedback = {
                "correct": state.feedback_correct,
                "corner": state.confirmed_corner,
                "correct_corner": state.correct_corner(self.bank),
            }

        ladder = self.bank.ladder
        return {
            "type": "snapshot",
            "seq": self.seq,
            "ts_ms": self.clock_ms,
            "phase": state.phase.value,
            "question": question,
            "answers": answers,
            "highlighted": state.highlighted,
            "feedback": feedback,
            "score_level": state.score_level,
            "prize": ladder[state.score_level - 1] if state.score_level > 0 else None,
            "position": {
                "x": round(frame.position[0], 4),
                "y": round(frame.position[1], 4),
            },
            "selection": frame.selection.selected,
            "beacons": beacons,
        }


def build_engine(config: AppConfig, bank: quiz.QuestionBank) -> CoreEngine:
    """Wire the mode-appropriate source; live and replay never touch the sim rng."""
    recorder = None
    if config.record_path and config.mode != "replay":
        sink = open(config.record_path, "w", encoding="utf-8", newline="\n")
        recorder = SessionRecorder(sink, config)
    if config.mode == "sim":
        source = SimSource(config, random.Random(config.seed))
    elif config.mode == "replay":
        source = ReplaySource.from_path(config.replay_path)
    else:
        source = LiveFeedSource()
    return CoreEngine(config, bank, source, recorder)
