import json

import numpy as np
import pytest
from click.testing import CliRunner

from fluxlab.cli import main
from fluxlab.geometry import primitives, save_stl


@pytest.fixture(scope="module")
def small_cylinder_stl(tmp_path_factory):
    path = tmp_path_factory.mktemp("meshes") / "cyl.stl"
    save_stl(primitives.cylinder(12.0, 44.0, segments=64), path)
    return path


@pytest.fixture(scope="module")
def package_dir(small_cylinder_stl, tmp_path_factory):
    out = tmp_path_factory.mktemp("pkg")
    runner = CliRunner()
    result = runner.invoke(main, [
        "convert", str(small_cylinder_stl), "--elasticity", "0.5",
        "--behavior", "bending", "--bend-azimuth", "90",
        "--span", "-11", "11", "-o", str(out), "--json"])
    assert result.exit_code == 0, result.output
    return out


class TestConvert:
    def test_package_contents(self, package_dir):
        for name in ("main.stl", "bottom.stl", "report.json", "params.json",
                     "source.stl"):
            assert (package_dir / name).exists()

    def test_report_schema(self, package_dir):
        report = json.loads((package_dir / "report.json").read_text())
        assert report["schema_version"] == 1
        assert isinstance(report["wall_pass"], bool)
        assert "solidity" in report

    def test_params_schema(self, package_dir):
        params = json.loads((package_dir / "params.json").read_text())
        assert params["schema_version"] == 1
        assert params["gyroid"]["wall"] == 1.0
        assert params["channel"]["radius"] == 5.0
        assert len(params["anchors"]) == 1

    def test_unknown_flag_usage_error(self, small_cylinder_stl):
        runner = CliRunner()
        result = runner.invoke(main, ["convert", str(small_cylinder_stl),
                                      "--bogus"])
        assert result.exit_code == 2

    def test_domain_error_exit_1(self, tmp_path):
        bad = tmp_path / "bad.stl"
        bad.write_bytes(b"not an stl")
        runner = CliRunner()
        result = runner.invoke(main, ["convert", str(bad), "-o",
                                      str(tmp_path / "o")])
        assert result.exit_code == 1

    def test_idempotent_outputs(self, small_cylinder_stl, tmp_path):
        runner = CliRunner()
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            result = runner.invoke(main, [
                "convert", str(small_cylinder_stl), "--span", "-11", "11",
                "-o", str(out)])
            assert result.exit_code == 0, result.output
            outs.append((out / "main.stl").read_bytes())
        assert outs[0] == outs[1]


class TestReportCommand:
    def test_report_on_package(self, package_dir, tmp_path):
        runner = CliRunner()
        out = tmp_path / "rep"
        result = runner.invoke(main, ["report", str(package_dir),
                                      "-o", str(out), "--json"])
        assert result.exit_code == 0, result.output
        assert (out / "report.json").exists()
        assert (out / "report.csv").exists()
        assert (out / "printability.png").exists()
        assert (out / "wall_thickness.png").exists()

    def test_report_on_bare_mesh(self, small_cylinder_stl, tmp_path):
        runner = CliRunner()
        out = tmp_path / "rep2"
        result = runner.invoke(main, ["report", str(small_cylinder_stl),
                                      "-o", str(out)])
        assert result.exit_code == 0, result.output
        report = json.loads((out / "report.json").read_text())
        assert "min_wall_mm" in report


class TestSynthTrainEvaluate:
    @pytest.fixture(scope="class")
    def dataset_dir(self, tmp_path_factory):
        out = tmp_path_factory.mktemp("data")
        runner = CliRunner()
        result = runner.invoke(main, [
            "synth-data", "--solidity", "0.11", "--per-class", "6",
            "--seed", "7", "-o", str(out), "--json"])
        assert result.exit_code == 0, result.output
        doc = json.loads(result.output)
        assert doc["n_traces"] == 42
        return out

    def test_dataset_layout(self, dataset_dir):
        level = dataset_dir / "0.11"
        labels = sorted(p.name for p in level.iterdir())
        assert len(labels) == 7
        files = list((level / "Compression").glob("*.jsonl"))
        assert len(files) == 6

    @pytest.fixture(scope="class")
    def model_dir(self, dataset_dir, tmp_path_factory):
        out = tmp_path_factory.mktemp("model")
        runner = CliRunner()
        result = runner.invoke(main, [
            "train", str(dataset_dir), "--solidity", "0.11",
            "--epochs", "25", "--seed", "7", "-o", str(out), "--json"])
        assert result.exit_code == 0, result.output
        return out

    def test_train_artifacts(self, model_dir):
        for name in ("model.json", "predict.py", "history.json",
                     "history.csv", "training_curves.png"):
            assert (model_dir / name).exists()

    def test_evaluate_outputs(self, model_dir, dataset_dir, tmp_path):
        runner = CliRunner()
        out = tmp_path / "eval"
        result = runner.invoke(main, [
            "evaluate", str(model_dir), str(dataset_dir),
            "--solidity", "0.11", "-o", str(out), "--json"])
        assert result.exit_code == 0, result.output
        doc = json.loads(result.output)
        assert len(doc["confusion"]) == 7
        assert (out / "metrics.json").exists()
        assert (out / "metrics.csv").exists()
        assert (out / "confusion_matrix.png").exists()

    def test_predict_single_trace(self, model_dir, dataset_dir):
        trace = next((dataset_dir / "0.11" / "Compression").glob("*.jsonl"))
        runner = CliRunner()
        result = runner.invoke(main, ["predict", str(model_dir), str(trace),
                                      "--json"])
        assert result.exit_code == 0, result.output
        doc = json.loads(result.output)
        assert doc["true_label"] == "Compression"


class TestScenarioCommand:
    def test_scenario_outputs(self, tmp_path):
        script = tmp_path / "script.json"
        script.write_text(json.dumps({
            "duration_ms": 20000,
            "gestures": [{"t_ms": 500, "label": "Bending"}],
        }))
        out = tmp_path / "trace"
        runner = CliRunner()
        result = runner.invoke(main, ["scenario", str(script), "-o",
                                      str(out), "--json"])
        assert result.exit_code == 0, result.output
        doc = json.loads(result.output)
        assert "Actuating" in doc["modes"]
        assert (out / "trace.json").exists()
        assert (out / "trace.csv").exists()
        assert (out / "scenario.png").exists()

    def test_bad_script_schema(self, tmp_path):
        script = tmp_path / "bad.json"
        script.write_text(json.dumps({"nope": 1}))
        runner = CliRunner()
        result = runner.invoke(main, ["scenario", str(script), "-o",
                                      str(tmp_path / "t")])
        assert result.exit_code == 1


class TestConfig:
    def test_config_file_respected(self, tmp_path, small_cylinder_stl):
        from fluxlab.config import ProjectConfig
        cfg_path = tmp_path / "cfg.json"
        doc = ProjectConfig().to_json()
        doc["geometry"]["voxel_mm"] = 0.8
        cfg_path.write_text(json.dumps(doc))
        runner = CliRunner()
        out = tmp_path / "o"
        result = runner.invoke(main, [
            "--config", str(cfg_path), "convert", str(small_cylinder_stl),
            "--span", "-11", "11", "-o", str(out)])
        assert result.exit_code == 0, result.output

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"geometry": {"nope": 1}}))
        runner = CliRunner()
        result = runner.invoke(main, ["--config", str(cfg_path), "scenario",
                                      "x", "-o", "y"])
        assert result.exit_code == 1
