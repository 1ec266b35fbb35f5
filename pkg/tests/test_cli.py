import json
import subprocess
import sys

import pytest

from beaconquiz import game as quiz
from beaconquiz.cli import main, parse_waypoints, timed_path
from beaconquiz.config import config_from_dict
from beaconquiz.engine import build_engine
from beaconquiz.pipeline import load_scan_log

QUIET_CONFIG = {
    "mode": "sim",
    "seed": 42,
    "room": {"propagation": {"noise_sigma_db": 0.0}},
    "feedback_auto_advance_ms": 0,
    "shuffle_answers": False,
}


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(QUIET_CONFIG))
    return str(path)


class TestWaypoints:
    def test_parse(self):
        assert parse_waypoints("3,3;0,0") == [(3.0, 3.0), (0.0, 0.0)]

    def test_parse_rejects_garbage(self):
        with pytest.raises(ValueError, match="waypoint 1"):
            parse_waypoints("3,3;nope")

    def test_timing_at_walk_speed(self):
        path = timed_path([(0.0, 0.0), (3.0, 4.0)], walk_speed_mps=1.0)
        assert path == [(0, (0.0, 0.0)), (5000, (3.0, 4.0))]


class TestSimulateCommand:
    def test_writes_parseable_log(self, config_file, tmp_path):
        out = tmp_path / "scan.ndjson"
        rc = main(
            [
                "simulate",
                "--config", config_file,
                "--path", "3,3;0,0",
                "--out", str(out),
                "--hold-ms", "1000",
            ]
        )
        assert rc == 0
        samples = load_scan_log(str(out))
        # walk takes 4243 ms, plus 1 s hold: 5243 ms -> 52 per beacon
        assert len(samples) == 52 * 4
        assert [s.ts_ms for s in samples] == sorted(s.ts_ms for s in samples)

    def test_missing_config_fails(self, tmp_path):
        rc = main(
            [
                "simulate",
                "--config", str(tmp_path / "absent.json"),
                "--path", "3,3",
                "--out", str(tmp_path / "x.ndjson"),
            ]
        )
        assert rc == 1


class TestReplayCommand:
    def record_winning_session(self, tmp_path):
        from test_engine import drive_to_win

        session = tmp_path / "session.ndjson"
        config = config_from_dict(dict(QUIET_CONFIG, record_path=str(session)))
        bank = quiz.default_question_bank()
        engine = build_engine(config, bank)
        drive_to_win(engine, bank)
        engine.recorder.close()
        return session

    def test_assert_final_phase_won(self, config_file, tmp_path):
        session = self.record_winning_session(tmp_path)
        rc = main(
            [
                "replay",
                "--config", config_file,
                "--replay-file", str(session),
                "--assert-final-phase", "won",
            ]
        )
        assert rc == 0

    def test_assert_final_phase_mismatch_fails(self, config_file, tmp_path):
        session = self.record_winning_session(tmp_path)
        rc = main(
            [
                "replay",
                "--config", config_file,
                "--replay-file", str(session),
                "--assert-final-phase", "game_over",
            ]
        )
        assert rc == 1

    def test_snapshots_out_writes_ndjson(self, config_file, tmp_path):
        session = self.record_winning_session(tmp_path)
        snaps = tmp_path / "snaps.ndjson"
        rc = main(
            [
                "replay",
                "--config", config_file,
                "--replay-file", str(session),
                "--snapshots-out", str(snaps),
            ]
        )
        assert rc == 0
        lines = snaps.read_text().splitlines()
        assert json.loads(lines[-1])["phase"] == "won"
        seqs = [json.loads(l)["seq"] for l in lines]
        assert seqs == list(range(1, len(lines) + 1))


class TestSubprocessEntry:
    def test_module_invocation(self, config_file, tmp_path):
        out = tmp_path / "scan.ndjson"
        proc = subprocess.run(
            [
                sys.executable, "-m", "beaconquiz.cli",
                "simulate",
                "--config", config_file,
                "--path", "3,3",
                "--out", str(out),
                "--hold-ms", "500",
            ],
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert proc.returncode == 0, proc.stderr
        assert "wrote" in proc.stdout
        assert out.exists()

    def test_bad_config_nonzero_exit(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"mode": "replay"}))  # missing replay_path
        proc = subprocess.run(
            [
                sys.executable, "-m", "beaconquiz.cli",
                "replay",
                "--config", str(bad),
                "--replay-file", str(tmp_path / "none.ndjson"),
            ],
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert proc.returncode == 1
        assert "error" in proc.stderr
