"""End-to-end tests for CLI commands."""
from __future__ import annotations

import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from sgraphs.cli import EXIT_DATA, EXIT_USAGE, app, main
from sgraphs.config import load_config
from sgraphs.geometry import Pose
from sgraphs.io import Trajectory, read_tum, read_xyz, write_tum, write_xyz
from sgraphs.sim import SCENARIOS, load_waypoints, load_world, read_dataset

runner = CliRunner()

LIGHT_CONFIG = "simulator.h_rays = 120\nsimulator.v_rays = 8\n"


@pytest.fixture
def small_inputs(temp_dir: Path) -> dict[str, Path]:
    """World, waypoints and a light scanner config for a short walk in one room."""
    world = temp_dir / "world.yaml"
    world.write_text("floors:\n  - floor_id: 0\n    rooms:\n      - {x_min: 0, y_min: 0, x_max: 5, y_max: 4}\n")
    waypoints = temp_dir / "waypoints.yaml"
    waypoints.write_text("points:\n  - {x: 1, y: 1}\n  - {x: 4, y: 1}\n  - {x: 4, y: 3}\n")
    config = temp_dir / "light.conf"
    config.write_text(LIGHT_CONFIG)
    return {"world": world, "waypoints": waypoints, "config": config}


def simulate(inputs: dict[str, Path], out: Path, seed: int = 0):
    return runner.invoke(
        app,
        [
            "simulate", str(inputs["world"]),
            "--waypoints", str(inputs["waypoints"]),
            "--out", str(out),
            "--seed", str(seed),
            "--config", str(inputs["config"]),
        ],
    )


@pytest.mark.e2e
class TestCliHelp:
    """Tests for CLI help commands."""

    def test_main_help(self):
        """Main help lists every command."""
        result = runner.invoke(app, ["--help"])
        assert result.exit_code == 0
        for command in ("run", "simulate", "scenario", "config", "eval", "eval-map"):
            assert command in result.stdout

    def test_run_help(self):
        """Run help documents its options."""
        result = runner.invoke(app, ["run", "--help"])
        assert result.exit_code == 0
        for option in ("--config", "--out", "--odom", "--seed", "--single-thread"):
            assert option in result.stdout

    def test_simulate_help(self):
        """Simulate help documents waypoints and seed."""
        result = runner.invoke(app, ["simulate", "--help"])
        assert result.exit_code == 0
        assert "--waypoints" in result.stdout
        assert "--seed" in result.stdout


@pytest.mark.e2e
class TestSimulateCommand:
    """Tests for dataset generation."""

    def test_writes_dataset(self, small_inputs, temp_dir):
        """A dataset directory with scans and both trajectories is written."""
        result = simulate(small_inputs, temp_dir / "ds")
        assert result.exit_code == 0, result.output
        data = read_dataset(temp_dir / "ds")
        assert len(data) == 26
        assert data.world == load_world(small_inputs["world"])

    def test_seed_changes_noise(self, small_inputs, temp_dir):
        """Different seeds give different odometry; equal seeds give equal files."""
        for name, seed in (("a", 1), ("b", 1), ("c", 2)):
            assert simulate(small_inputs, temp_dir / name, seed).exit_code == 0
        odom = {name: (temp_dir / name / "odom.tum").read_text() for name in "abc"}
        assert odom["a"] == odom["b"]
        assert odom["a"] != odom["c"]

    def test_waypoint_in_wall(self, small_inputs, temp_dir):
        """Waypoints outside free space are a data error."""
        small_inputs["waypoints"].write_text("points:\n  - {x: 1, y: 1}\n  - {x: 9, y: 1}\n")
        result = simulate(small_inputs, temp_dir / "ds")
        assert result.exit_code == EXIT_DATA
        assert "error" in result.output

    def test_missing_world(self, small_inputs, temp_dir):
        """A missing world file is a data error."""
        small_inputs["world"] = temp_dir / "nope.yaml"
        assert simulate(small_inputs, temp_dir / "ds").exit_code == EXIT_DATA


@pytest.mark.e2e
class TestRunCommand:
    """Tests for the full pipeline command."""

    def test_run_writes_outputs(self, small_inputs, temp_dir):
        """A run over a simulated dataset writes every artifact."""
        assert simulate(small_inputs, temp_dir / "ds").exit_code == 0
        out = temp_dir / "out"
        result = runner.invoke(
            app, ["run", str(temp_dir / "ds"), "--config", str(small_inputs["config"]), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert "keyframes" in result.stdout

        est = read_tum(out / "est.tum")
        assert len(est) == 26
        assert len(read_xyz(out / "map.xyz")) > 0
        graph = json.loads((out / "sgraph.json").read_text())
        assert graph["variables"]
        report = json.loads((out / "report.json").read_text())
        assert report["frames"] == 26
        assert report["ate_rmse"] is not None
        assert "wall_clock_s" not in report
        assert "wall_clock_s" in json.loads((out / "timing.json").read_text())

    def test_run_missing_dataset(self, temp_dir):
        """Running on a missing directory is a data error."""
        result = runner.invoke(app, ["run", str(temp_dir / "missing"), "--out", str(temp_dir / "out")])
        assert result.exit_code == EXIT_DATA

    def test_run_bad_config(self, temp_dir):
        """A broken config is reported, not raised."""
        bad = temp_dir / "bad.conf"
        bad.write_text("keyframe.min_translation = -3\n")
        result = runner.invoke(app, ["run", str(temp_dir), "--config", str(bad)])
        assert result.exit_code == EXIT_DATA


@pytest.mark.e2e
class TestEvalCommands:
    """Tests for the trajectory and map metrics commands."""

    def test_eval_identical(self, temp_dir):
        """A trajectory compared with itself scores zero."""
        traj = Trajectory([0.0, 1.0, 2.0], [Pose.translation_only(float(i), 0.0, 0.0) for i in range(3)])
        path = write_tum(temp_dir / "a.tum", traj)
        result = runner.invoke(app, ["eval", "--est", str(path), "--ref", str(path)])
        assert result.exit_code == 0
        assert "ATE RMSE: 0.000000 m" in result.stdout

    def test_eval_no_overlap(self, temp_dir):
        """Disjoint timestamps are a data error."""
        a = write_tum(temp_dir / "a.tum", Trajectory([0.0], [Pose.identity()]))
        b = write_tum(temp_dir / "b.tum", Trajectory([50.0], [Pose.identity()]))
        result = runner.invoke(app, ["eval", "--est", str(a), "--ref", str(b)])
        assert result.exit_code == EXIT_DATA

    def test_eval_map(self, small_inputs, temp_dir):
        """A point on a wall face scores near zero against its world."""
        est = write_xyz(temp_dir / "map.xyz", [[0.05, 2.0, 1.0]])
        result = runner.invoke(app, ["eval-map", "--est", str(est), "--world", str(small_inputs["world"])])
        assert result.exit_code == 0
        assert "Map RMSE: 0.0" in result.stdout

    def test_eval_map_empty(self, small_inputs, temp_dir):
        """An empty estimate is a data error."""
        est = temp_dir / "empty.xyz"
        est.write_text("")
        result = runner.invoke(app, ["eval-map", "--est", str(est), "--world", str(small_inputs["world"])])
        assert result.exit_code == EXIT_DATA


@pytest.mark.e2e
class TestScenarioAndConfigCommands:
    """Tests for the bundled scenario export and config printing."""

    @pytest.mark.parametrize("name", sorted(SCENARIOS))
    def test_scenario_files_load(self, name, temp_dir):
        """Exported scenarios load back as a world and a plan."""
        result = runner.invoke(app, ["scenario", name, "--out", str(temp_dir)])
        assert result.exit_code == 0, result.output
        assert load_world(temp_dir / "world.yaml").floors
        assert load_waypoints(temp_dir / "waypoints.yaml").points

    def test_unknown_scenario(self, temp_dir):
        """Unknown scenario names are usage errors."""
        result = runner.invoke(app, ["scenario", "castle", "--out", str(temp_dir)])
        assert result.exit_code != 0
        assert not (temp_dir / "world.yaml").exists()

    def test_config_stdout(self):
        """The effective config is printed as dotted keys."""
        result = runner.invoke(app, ["config"])
        assert result.exit_code == 0
        assert "keyframe.min_translation = 0.5" in result.stdout

    def test_config_out(self, small_inputs, temp_dir):
        """Saved configs keep the loaded overrides."""
        out = temp_dir / "effective.conf"
        result = runner.invoke(app, ["config", "--config", str(small_inputs["config"]), "--out", str(out)])
        assert result.exit_code == 0
        assert load_config(out).simulator.h_rays == 120


@pytest.mark.e2e
class TestMainExitCodes:
    """Tests for the console entry point."""

    def test_success(self):
        """Help exits cleanly."""
        assert main(["--help"]) == 0

    def test_usage_error(self):
        """A missing argument is a usage error."""
        assert main(["run"]) == EXIT_USAGE

    def test_unknown_option(self):
        """Unknown options are usage errors."""
        assert main(["eval", "--bogus"]) == EXIT_USAGE

    def test_data_error(self, temp_dir):
        """Missing input files exit with the data error code."""
        missing = str(temp_dir / "missing.tum")
        assert main(["eval", "--est", missing, "--ref", missing]) == EXIT_DATA

    def test_eval_non_utf8(self, temp_dir):
        """A trajectory file that is not UTF-8 is a data error, not a traceback."""
        bad = temp_dir / "bad.tum"
        bad.write_bytes(b"0.0 1 2 3 0 0 0 1\n\xff\xfe\n")
        assert main(["eval", "--est", str(bad), "--ref", str(bad)]) == EXIT_DATA

    def test_eval_map_non_utf8(self, small_inputs, temp_dir):
        """Map and world files that are not UTF-8 are data errors."""
        bad = temp_dir / "bad.xyz"
        bad.write_bytes(b"0.0 1.0 2.0\n\xff\xfe\n")
        good = write_xyz(temp_dir / "good.xyz", [[0.05, 2.0, 1.0]])
        assert main(["eval-map", "--est", str(bad), "--world", str(small_inputs["world"])]) == EXIT_DATA
        bad_world = temp_dir / "bad_world.yaml"
        bad_world.write_bytes(b"floors: []\n\xff\n")
        assert main(["eval-map", "--est", str(good), "--world", str(bad_world)]) == EXIT_DATA

    def test_config_non_utf8(self, temp_dir):
        """A config file that is not UTF-8 is reported with the data error code."""
        bad = temp_dir / "bad.conf"
        bad.write_bytes(b"seed = 1\n\xff\n")
        assert main(["config", "--config", str(bad)]) == EXIT_DATA
