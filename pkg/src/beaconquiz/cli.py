"""Command-line entry points: serve, replay, simulate."""

from __future__ import annotations

import argparse
import math
import random
import sys
from dataclasses import replace

from . import game as quiz
from .config import AppConfig, ConfigError, load_config
from .engine import ReplaySource, build_engine, snapshot_json
from .pipeline import ScanLogError
from .simulation import BeaconSimulator, PathPoint, save_scan_log


def _apply_overrides(config: AppConfig, args: argparse.Namespace) -> AppConfig:
    updates = {}
    if getattr(args, "mode", None):
        updates["mode"] = args.mode
    if getattr(args, "replay_file", None):
        updates["replay_path"] = args.replay_file
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "listen", None):
        host, _, port = args.listen.rpartition(":")
        updates["listen_host"] = host
        updates["listen_port"] = int(port)
    if getattr(args, "questions", None):
        updates["questions_path"] = args.questions
    if getattr(args, "record", None):
        updates["record_path"] = args.record
    config = replace(config, **updates)
    if config.mode == "replay" and not config.replay_path:
        raise ConfigError("replay_path", "required when mode is 'replay'")
    return config


def _load_bank(config: AppConfig) -> quiz.QuestionBank:
    if config.questions_path:
        return quiz.load_question_bank(config.questions_path)
    return quiz.default_question_bank()


def cmd_serve(args: argparse.Namespace) -> int:
    from .server import serve

    config = _apply_overrides(load_config(args.config), args)
    return serve(config)


def run_replay(
    config: AppConfig,
    snapshots_out: str | None = None,
    run_out_ms: int = 0,
) -> list[str]:
    """Tick an engine over a recorded session; returns one JSON line per snapshot."""
    bank = _load_bank(config)
    engine = build_engine(config, bank)
    source = engine.source
    assert isinstance(source, ReplaySource)
    lines = []
    while not source.exhausted:
        lines.append(snapshot_json(engine.tick()))
    for _ in range(run_out_ms // config.tick_ms):
        lines.append(snapshot_json(engine.tick()))
    if snapshots_out:
        with open(snapshots_out, "w", encoding="utf-8", newline="\n") as f:
            for line in lines:
                f.write(line + "\n")
    return lines


def cmd_replay(args: argparse.Namespace) -> int:
    config = _apply_overrides(load_config(args.config), args)
    config = replace(config, mode="replay", replay_path=args.replay_file)
    lines = run_replay(config, snapshots_out=args.snapshots_out, run_out_ms=args.run_out_ms)
    if not lines:
        print("replay produced no snapshots", file=sys.stderr)
        return 1
    import json

    final_phase = json.loads(lines[-1])["phase"]
    print(f"replayed {len(lines)} snapshots, final phase: {final_phase}")
    if args.assert_final_phase and final_phase != args.assert_final_phase.lower():
        print(
            f"final phase {final_phase!r} != expected {args.assert_final_phase.lower()!r}",
            file=sys.stderr,
        )
        return 1
    return 0


def parse_waypoints(text: str) -> list[tuple[float, float]]:
    """Parse 'x,y;x,y;...' (meters) into waypoints."""
    points = []
    for i, chunk in enumerate(text.split(";")):
        parts = chunk.split(",")
        if len(parts) != 2:
            raise ValueError(f"waypoint {i}: expected 'x,y', got {chunk!r}")
        points.append((float(parts[0]), float(parts[1])))
    if not points:
        raise ValueError("at least one waypoint required")
    return points


def timed_path(
    waypoints: list[tuple[float, float]], walk_speed_mps: float, start_ms: int = 0
) -> list[PathPoint]:
    """Assign timestamps assuming constant walking speed between waypoints."""
    path: list[PathPoint] = [(start_ms, waypoints[0])]
    t = float(start_ms)
    for prev, cur in zip(waypoints, waypoints[1:]):
        d = math.hypot(cur[0] - prev[0], cur[1] - prev[1])
        t += d / walk_speed_mps * 1000.0
        path.append((round(t), cur))
    return path


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _apply_overrides(load_config(args.config), args)
    waypoints = parse_waypoints(args.path)
    path = timed_path(waypoints, config.walk_speed_mps)
    until = path[-1][0] + args.hold_ms
    rng = random.Random(config.seed)
    simulator = BeaconSimulator(config.room, rng)
    samples = simulator.advance(path, until)
    save_scan_log(samples, args.out)
    print(f"wrote {len(samples)} samples over {until} ms to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beaconquiz",
        description="Indoor-positioning quiz demo: simulated beacon room, "
        "RSSI pipeline, and a live game server.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the game server")
    p_serve.add_argument("--config", required=True)
    p_serve.add_argument("--mode", choices=["sim", "replay", "live"])
    p_serve.add_argument("--replay-file")
    p_serve.add_argument("--seed", type=int)
    p_serve.add_argument("--listen", help="host:port")
    p_serve.add_argument("--questions", help="question bank JSON path")
    p_serve.add_argument("--record", help="session log output path (sim mode)")
    p_serve.set_defaults(func=cmd_serve)

    p_replay = sub.add_parser("replay", help="headless replay of a session log")
    p_replay.add_argument("--config", required=True)
    p_replay.add_argument("--replay-file", required=True)
    p_replay.add_argument("--assert-final-phase", help="e.g. won, game_over")
    p_replay.add_argument("--snapshots-out", help="write snapshot NDJSON here")
    p_replay.add_argument(
        "--run-out-ms", type=int, default=0,
        help="keep ticking this long after the log is exhausted",
    )
    p_replay.add_argument("--seed", type=int)
    p_replay.add_argument("--questions")
    p_replay.set_defaults(func=cmd_replay)

    p_sim = sub.add_parser("simulate", help="generate a scan log headlessly")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--path", required=True, help="waypoints 'x,y;x,y' in meters")
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--hold-ms", type=int, default=0,
                       help="keep broadcasting this long after the last waypoint")
    p_sim.add_argument("--seed", type=int)
    p_sim.set_defaults(func=cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ScanLogError, quiz.QuestionBankError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
