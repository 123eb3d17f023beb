"""
Tests for end-to-end runs, report writers and the command line.
"""
import csv
import json
from fractions import Fraction

import pytest
import yaml
from typer.testing import CliRunner

from blurreg.cli.commands import app
from blurreg.config import get_settings
from blurreg.config.scenario import ScenarioConfig, worked_example_config
from blurreg.core.errors import GridValidationError, RegimeError, ReproductionMismatch
from blurreg.core.experiment import (
    STAGES,
    reproduce_worked_example,
    run_scenario,
    write_report_csv,
    write_report_json,
)
from blurreg.core.normal import norm_cdf
from conftest import EXPECTED_PAIRS, FIXTURES

runner = CliRunner()


@pytest.fixture
def golden():
    return json.loads((FIXTURES / "worked_example.json").read_text(encoding="utf-8"))


@pytest.fixture
def full_report():
    return run_scenario(worked_example_config(v="1/512"))


def scenario_file(tmp_path, **overrides):
    data = json.loads(worked_example_config().model_dump_json())
    data.update(overrides)
    path = tmp_path / "scenario.yaml"
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return path


class TestRunScenario:
    """run_scenario on the built-in example."""

    def test_matches_golden(self, full_report, golden):
        data = full_report.to_dict()

        assert data["gamma"] == golden["gamma"]
        assert data["d"] == golden["d"]
        assert data["y"] == golden["gamma"]
        pairs = [[p["i1"], p["i2"]] for p in data["alignment"]["pairs"]]
        assert pairs == golden["pairs"]

    def test_all_stages(self, full_report):
        assert full_report.passed
        assert full_report.alignment.index_pairs() == EXPECTED_PAIRS
        assert full_report.baseline_argmax == -1
        assert full_report.matrices["seq1"]["iota"] == [1, 4, 6, 9, 11]
        assert full_report.matrices["seq1"]["critical"] == [
            {"row": 1, "col": 0, "value": "144/256"},
            {"row": 6, "col": 2, "value": "136/256"},
        ]
        assert full_report.matrices["seq2"]["iota"] == [1, 3, 6, 8, 10]
        assert full_report.exactness["tau"] == "16/256"
        assert full_report.exactness["conditions_hold"] is True
        assert 7.5 <= full_report.bounds["T_over_sigma_max"] <= 7.75

    def test_stage_selection(self):
        report = run_scenario(worked_example_config(v="1/512"), stages=("baseline",))

        assert report.alignment is None
        assert report.matrices == {}
        assert report.exactness == {}
        assert report.correlation

    def test_v_scan_prefers_expected_pairs(self):
        report = run_scenario(worked_example_config(x="3/256"), stages=("align",))

        assert report.alignment.index_pairs() == EXPECTED_PAIRS
        assert report.checks["alignment_pairs"]
        assert report.alignment.v in report.v_candidates

    def test_unknown_stage(self):
        with pytest.raises(ValueError, match="unknown stages"):
            run_scenario(worked_example_config(), stages=("align", "plot"))
        assert "infer" in STAGES

    def test_wide_blur_is_out_of_regime(self):
        data = worked_example_config(v="1/512").model_dump()
        data["blur"] = [{"w": 1, "sigma": 0.2}]
        config = ScenarioConfig.model_validate(data)

        with pytest.raises(RegimeError, match="exceeds the bound"):
            run_scenario(config, stages=("matrices",))

    def test_short_grid(self):
        data = worked_example_config().model_dump()
        data["grids"][0]["N"] = 9
        config = ScenarioConfig.model_validate(data)

        with pytest.raises(GridValidationError, match="increase N"):
            run_scenario(config)


class TestReproduction:
    """The built-in reproduction and its failure mode."""

    @pytest.mark.slow
    def test_reproduces(self):
        report = reproduce_worked_example()

        assert report.passed
        assert report.checks["dp_failure_range"]
        assert report.checks["sigma_max"]
        assert report.alignment.index_pairs() == EXPECTED_PAIRS

    @pytest.mark.slow
    def test_skewed_cdf_is_reported(self):
        with pytest.raises(ReproductionMismatch) as excinfo:
            reproduce_worked_example(cdf=lambda z: norm_cdf(z + 0.05), dp_limit=0)

        assert any(f.startswith("gamma1") for f in excinfo.value.failures)
        assert excinfo.value.exit_code == 4


class TestWriters:
    """JSON and CSV report files."""

    def test_json(self, full_report, tmp_path):
        path = write_report_json(full_report, tmp_path / "nested" / "report.json")
        data = json.loads(path.read_text(encoding="utf-8"))

        assert data["name"] == "worked-example"
        assert data["alignment"]["v"] == "1/512"
        assert data["failures"] == []

    def test_csv(self, full_report, tmp_path):
        written = write_report_csv(full_report, tmp_path)

        assert sorted(p.name for p in written) == [
            "bounds.csv",
            "correlation.csv",
            "difference1.csv",
            "difference1_forms.json",
            "difference2.csv",
            "difference2_forms.json",
            "measurement1.csv",
            "measurement1_forms.json",
            "measurement2.csv",
            "measurement2_forms.json",
            "sequences.csv",
        ]
        with (tmp_path / "sequences.csv").open(newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 13
        assert rows[1]["gamma1"] == "144/256"
        assert rows[3]["d2"] == "-461/256"

        with (tmp_path / "measurement1.csv").open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        assert rows[0][:2] == ["row", "col0"]
        assert rows[2][1] == "144/256"

        with (tmp_path / "correlation.csv").open(newline="", encoding="utf-8") as fh:
            lags = {int(row["lag"]): row for row in csv.DictReader(fh)}
        assert set(lags) == set(range(-12, 13))
        assert Fraction(int(lags[-1]["numerator"]), int(lags[-1]["denominator"])) == full_report.correlation[-1]

    def test_forms_sidecar(self, full_report, tmp_path):
        write_report_csv(full_report, tmp_path)

        measurement = json.loads((tmp_path / "measurement1_forms.json").read_text(encoding="utf-8"))
        difference = json.loads((tmp_path / "difference1_forms.json").read_text(encoding="utf-8"))

        assert measurement["matrix"] == "measurement"
        assert measurement["iota"] == [1, 4, 6, 9, 11]
        assert measurement["column_forms"] == ["F-form", "pure", "F-form", "pure", "pure"]
        assert len(measurement["critical_per_row"]) == 13
        assert sum(measurement["critical_per_row"]) == 2
        assert difference["matrix"] == "difference"
        assert difference["row_labels"] == full_report.matrices["seq1"]["product_labels"]
        assert difference["sparsity_violations"] == []
        assert all(n <= 1 for n in difference["nonzero_per_row"])


class TestCLI:
    """Command-line entry points and exit codes."""

    def test_version(self):
        result = runner.invoke(app, ["version"])
        assert result.exit_code == 0
        assert "Version" in result.stdout

    def test_simulate_writes_report(self, tmp_path, golden):
        result = runner.invoke(app, ["simulate", "--out", str(tmp_path)])

        assert result.exit_code == 0
        data = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
        assert data["gamma"] == golden["gamma"]
        assert data["alignment"] is None

    def test_align(self, tmp_path):
        result = runner.invoke(app, ["align", "--v", "1/512", "--out", str(tmp_path)])

        assert result.exit_code == 0
        data = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
        assert [(p["i1"], p["i2"]) for p in data["alignment"]["pairs"]] == list(EXPECTED_PAIRS)

    def test_align_csv(self, tmp_path):
        result = runner.invoke(app, ["align", "--v", "1/512", "--format", "csv", "--out", str(tmp_path)])

        assert result.exit_code == 0
        assert (tmp_path / "sequences.csv").exists()

    def test_csv_default_directory_created_on_write(self, tmp_path, monkeypatch):
        target = tmp_path / "reports"
        monkeypatch.setattr(get_settings(), "OUT_DIR", target)
        assert not target.exists()

        result = runner.invoke(app, ["align", "--v", "1/512", "--format", "csv"])

        assert result.exit_code == 0
        assert (target / "sequences.csv").exists()

    @pytest.mark.parametrize(
        "args",
        [
            ["align", "--v", "0"],
            ["align", "--v", "1/512", "--v-scan"],
            ["simulate", "--x", "1/1000"],
            ["simulate", "--config", "missing.yaml"],
        ],
    )
    def test_invalid_input_exit_code(self, args):
        assert runner.invoke(app, args).exit_code == 2

    def test_regime_exit_code(self, tmp_path):
        path = scenario_file(tmp_path, blur=[{"w": 1, "sigma": 0.2}])

        result = runner.invoke(app, ["matrices", "--config", str(path), "--out", str(tmp_path)])

        assert result.exit_code == 3

    def test_config_file(self, tmp_path):
        path = scenario_file(tmp_path, v="1/512")

        result = runner.invoke(app, ["infer", "--config", str(path), "--out", str(tmp_path)])

        assert result.exit_code == 0
        data = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
        assert 7.5 <= data["bounds"]["T_over_sigma_max"] <= 7.75

    def test_align_pairs_mismatch_exit_code(self, tmp_path):
        path = scenario_file(tmp_path, v="1/512", expected_pairs=[[1, 1], [4, 4]])

        result = runner.invoke(app, ["align", "--config", str(path), "--out", str(tmp_path)])

        assert result.exit_code == 4
        data = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
        assert data["checks"]["alignment_pairs"] is False

    def test_mismatch_exit_code(self, monkeypatch):
        def fail():
            raise ReproductionMismatch(["gamma1: expected a, got b"])

        monkeypatch.setattr("blurreg.cli.commands.reproduce_worked_example", fail)

        result = runner.invoke(app, ["reproduce"])

        assert result.exit_code == 4

    @pytest.mark.slow
    def test_reproduce(self, tmp_path):
        result = runner.invoke(app, ["reproduce", "--out", str(tmp_path)])

        assert result.exit_code == 0
        data = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
        assert data["failures"] == []
        assert all(data["checks"].values())


if __name__ == "__main__":
    pytest.main(["-v", __file__])
