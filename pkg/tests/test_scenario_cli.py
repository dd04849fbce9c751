"""Scenario runner, preset registry, serialization contracts, CLI."""
import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from flocklab import cli
from flocklab.dynamics import TrajectoryRecord
from flocklab.errors import ConfigInvalidError, Requires2DError
from flocklab.presets import list_presets, lookup
from flocklab.scenario import (
    ScenarioConfig,
    build_graph,
    cluster_report,
    run_scenario,
)

ALL_PRESETS = [
    "fig3a_leaders",
    "fig3b_threegroup",
    "fig3c_assumptionB",
    "fig_snapshots",
    "sec53_asymptotic_graphs",
    "sec53_radius_sweep",
    "tab_adaptive_cs",
    "tab_classical_cs",
    "twobody_validation",
]


class TestRegistry:
    def test_contains_every_preset(self):
        names = [name for name, _, _ in list_presets()]
        assert names == ALL_PRESETS

    def test_lookup_rejects_unknown(self):
        with pytest.raises(ConfigInvalidError):
            lookup("does_not_exist")

    def test_config_round_trip_for_every_preset(self):
        for name in ALL_PRESETS:
            cfg = ScenarioConfig(name=name, seed=11, horizon_t=1.5,
                                 params={"x": [1, 2]})
            back = ScenarioConfig.from_json(cfg.to_json())
            assert back == cfg

    def test_unknown_config_fields_rejected(self):
        with pytest.raises(ConfigInvalidError):
            ScenarioConfig.from_json('{"name": "x", "bogus": 1}')


class TestRunScenario:
    def test_byte_identical_reruns(self, tmp_path):
        digests = []
        for run in ("a", "b"):
            out = tmp_path / run
            cfg = ScenarioConfig(name="fig3b_threegroup", seed=7,
                                 horizon_t=0.5, out_dir=str(out))
            run_scenario(cfg)
            files = sorted(p.name for p in out.iterdir()
                           if p.name != "manifest.json")
            digests.append({
                name: hashlib.sha256((out / name).read_bytes()).hexdigest()
                for name in files
            })
        assert digests[0] == digests[1]

    def test_manifest_digests_match_files(self, tmp_path):
        out = tmp_path / "run"
        cfg = ScenarioConfig(name="fig3b_threegroup", seed=1, horizon_t=0.3,
                             out_dir=str(out))
        manifest = run_scenario(cfg)
        assert (out / "manifest.json").exists()
        for entry in manifest.outputs:
            digest = hashlib.sha256((out / entry["path"]).read_bytes()).hexdigest()
            assert digest == entry["sha256"]

    def test_summary_metric_schema(self, tmp_path):
        out = tmp_path / "run"
        cfg = ScenarioConfig(name="fig3a_leaders", seed=2, horizon_t=0.5,
                             out_dir=str(out))
        run_scenario(cfg)
        summary = json.loads((out / "summary.json").read_text())
        assert summary["scenario"] == "fig3a_leaders"
        names = {m["name"] for m in summary["metrics"]}
        assert {"diameter_fixed_one", "diameter_fixed_two", "envelope"} <= names
        for m in summary["metrics"]:
            assert {"name", "final_value", "log_slope", "envelope_rate",
                    "envelope_satisfied"} <= set(m)

    def test_custom_scenario_and_trajectory_csv(self, tmp_path):
        out = tmp_path / "run"
        cfg = ScenarioConfig(
            name="custom", seed=5, horizon_t=0.2, sample_every=20,
            out_dir=str(out),
            params={
                "model": {"kind": "laplacian"},
                "graph": {"generator": "complete", "n": 6, "weight": 0.5},
                "initial": {"kind": "uniform_interval", "n": 6,
                            "low": 0.0, "high": 1.0},
                "outputs": ["diameter", "fluctuation_norm", "trajectory"],
            })
        run_scenario(cfg)
        header = (out / "trajectory.csv").read_text().splitlines()[0]
        assert header.split(",")[:3] == ["t", "x_0_0", "x_1_0"]
        series = (out / "diameter.csv").read_text().splitlines()
        assert series[0] == "t,value"
        assert len(series) == 2 + 200 // 20  # t=0 plus every 20th step

    def test_twobody_preset_agrees_with_itself(self, tmp_path):
        out = tmp_path / "run"
        cfg = ScenarioConfig(name="twobody_validation", seed=0, horizon_t=40.0,
                             out_dir=str(out),
                             params={"n_definite": 8, "max_draws": 60})
        run_scenario(cfg)
        summary = json.loads((out / "summary.json").read_text())
        assert summary["definite"] >= 8
        assert summary["agreement_rate"] == 1.0


class TestGraphBuilders:
    def test_known_generators(self):
        assert build_graph({"generator": "one_leader", "n": 5}).n_vertices == 5
        assert build_graph({"generator": "circulant", "n": 8,
                            "degree": 4}).neighbor_counts().tolist() == [4] * 8
        g = build_graph({"generator": "three_group", "sizes": [2, 2, 2]})
        assert g.n_vertices == 6

    def test_unknown_generator(self):
        with pytest.raises(ConfigInvalidError):
            build_graph({"generator": "petersen", "n": 10})


class TestClusterReport:
    def make_traj(self, positions, velocities):
        return TrajectoryRecord(
            times=np.array([0.0]),
            positions=np.asarray(positions, dtype=float)[None],
            velocities=np.asarray(velocities, dtype=float)[None])

    def test_single_flock_along_x(self):
        traj = self.make_traj(np.zeros((4, 2)), np.tile([1.0, 0.0], (4, 1)))
        report = cluster_report(traj, 0.0, 1.0)
        assert report == [(4, 0.0)]

    def test_two_clusters_up_and_down(self):
        pos = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 0.0], [5.1, 0.0]])
        vel = np.array([[0.0, 1.0], [0.0, 1.0], [0.0, -1.0], [0.0, -1.0]])
        report = cluster_report(self.make_traj(pos, vel), 0.0, 1.0)
        assert [size for size, _ in report] == [2, 2]
        assert [round(a, 6) for _, a in report] == [90.0, 270.0]

    def test_requires_two_dimensions(self):
        traj = self.make_traj(np.zeros((3, 1)), np.ones((3, 1)))
        with pytest.raises(Requires2DError):
            cluster_report(traj, 0.0, 1.0)


class TestCli:
    def test_list_presets_exit_code(self, capsys):
        assert cli.main(["list-presets"]) == 0
        out = capsys.readouterr().out
        for name in ALL_PRESETS:
            assert name in out

    def test_run_with_overrides(self, tmp_path, capsys):
        out = tmp_path / "o"
        rc = cli.main(["run", "fig3b_threegroup", "--seed", "9", "--T", "0.3",
                       "--out", str(out), "--param", "period_steps=5"])
        assert rc == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 9
        assert manifest["config"]["params"]["period_steps"] == 5

    def test_unknown_preset_is_config_error(self, capsys):
        assert cli.main(["run", "nope"]) == 2

    def test_bad_param_is_config_error(self, capsys):
        assert cli.main(["run", "fig3b_threegroup", "--param", "oops"]) == 2

    def test_validate_paths(self, tmp_path, capsys):
        good = tmp_path / "good.json"
        good.write_text(ScenarioConfig(name="fig3a_leaders", seed=1).to_json())
        assert cli.main(["validate", str(good)]) == 0
        bad = tmp_path / "bad.json"
        bad.write_text('{"name": "fig3a_leaders", "dt": -1}')
        assert cli.main(["validate", str(bad)]) == 2

    def test_model_error_is_runtime_exit(self, tmp_path, capsys):
        cfgfile = tmp_path / "degenerate.json"
        cfg = ScenarioConfig(
            name="custom", seed=0, horizon_t=0.1,
            out_dir=str(tmp_path / "run"),
            params={
                "model": {"kind": "singular_cs", "radius_d": 1.0},
                "initial": {"kind": "explicit",
                            "positions": [[0.0, 0.0], [0.1, 0.0]],
                            "velocities": [[0.0, 0.0], [1.0, 0.0]]},
                "outputs": ["velocity_deviation"],
            })
        cfgfile.write_text(cfg.to_json())
        assert cli.main(["run", str(cfgfile)]) == 3
