"""Scenario validation and the command line surface."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from gridveil.cli.scenario import load_scenario
from gridveil.errors import ScenarioError

REPO = Path(__file__).resolve().parent.parent
BASELINE = REPO / "scenarios" / "baseline.json"


def run_cli(*args, env=None):
    return subprocess.run(
        [sys.executable, "-m", "gridveil", *args],
        capture_output=True, text=True, cwd=REPO, env=env)


class TestScenarioLoading:
    def test_baseline_loads_clean(self):
        scn = load_scenario(BASELINE)
        assert scn.privacy.sigma == 2.0
        assert scn.dlc.intervals == [1, 2, 3, 4]
        assert len(scn.q_map) == 3
        assert scn.screening.zeta_override is None
        assert scn.insurance.eta_high_risk is None

    def test_invalid_sigma_pointer(self):
        with pytest.raises(ScenarioError) as err:
            load_scenario(REPO / "scenarios" / "invalid_sigma.json")
        assert ("/privacy/sigma", "must be > 0") in err.value.issues

    def test_invalid_theta_pointer(self):
        with pytest.raises(ScenarioError) as err:
            load_scenario(REPO / "scenarios" / "invalid_theta.json")
        assert any(ptr == "/screening" for ptr, _ in err.value.issues)

    def test_invalid_qmap_pointers(self):
        with pytest.raises(ScenarioError) as err:
            load_scenario(REPO / "scenarios" / "invalid_qmap.json")
        pointers = [ptr for ptr, _ in err.value.issues]
        assert "/q_map" in pointers

    def test_all_errors_collected(self, tmp_path):
        doc = json.loads(BASELINE.read_text())
        doc["privacy"]["sigma"] = -1
        doc["screening"]["p_high"] = 2.0
        doc["insurance"]["p_risky"] = 0.0
        bad = tmp_path / "multi.json"
        bad.write_text(json.dumps(doc))
        with pytest.raises(ScenarioError) as err:
            load_scenario(bad)
        pointers = {ptr for ptr, _ in err.value.issues}
        assert {"/privacy/sigma", "/screening/p_high",
                "/insurance/p_risky"} <= pointers

    def test_parse_error_carries_line_and_column(self, tmp_path):
        bad = tmp_path / "broken.json"
        bad.write_text('{\n  "privacy": [,]\n}')
        with pytest.raises(ScenarioError) as err:
            load_scenario(bad)
        assert "line 2" in err.value.issues[0][1]

    def test_explicit_null_means_absent_for_optional_fields(self, tmp_path):
        doc = json.loads(BASELINE.read_text())
        doc["screening"]["zeta_override"] = None
        doc["insurance"]["eta_high_risk"] = None
        doc["insurance"]["eta_low_risk"] = None
        doc["insurance"]["premium_rate"] = None
        scn_path = tmp_path / "nulls.json"
        scn_path.write_text(json.dumps(doc))
        scn = load_scenario(scn_path)
        assert scn.screening.zeta_override is None
        assert scn.insurance.eta_high_risk is None
        assert scn.insurance.premium_rate is None

    def test_eta_pair_required_together(self, tmp_path):
        doc = json.loads(BASELINE.read_text())
        doc["insurance"]["eta_high_risk"] = 0.4
        bad = tmp_path / "half_eta.json"
        bad.write_text(json.dumps(doc))
        with pytest.raises(ScenarioError) as err:
            load_scenario(bad)
        assert any(ptr == "/insurance" for ptr, _ in err.value.issues)


class TestCliSurface:
    def test_privacy_curve_outputs(self, tmp_path):
        res = run_cli("privacy-curve", "--scenario", str(BASELINE),
                      "--out-dir", str(tmp_path))
        assert res.returncode == 0, res.stderr
        csv = (tmp_path / "breach_curve.csv").read_text().splitlines()
        assert csv[0] == "interval,success_prob,failure_prob"
        assert len(csv) == 5
        svg = (tmp_path / "breach_curve.svg").read_text()
        assert svg.startswith("<svg")
        assert "scenario-sha256" in svg
        # self-contained: nothing referenced beyond the xmlns declaration
        assert "href" not in svg

    def test_format_csv_only(self, tmp_path):
        res = run_cli("privacy-curve", "--scenario", str(BASELINE),
                      "--out-dir", str(tmp_path), "--format", "csv")
        assert res.returncode == 0
        assert (tmp_path / "breach_curve.csv").exists()
        assert not (tmp_path / "breach_curve.svg").exists()

    def test_validation_failure_exit_code(self, tmp_path):
        res = run_cli("pipeline", "--scenario",
                      str(REPO / "scenarios" / "invalid_sigma.json"),
                      "--out-dir", str(tmp_path))
        assert res.returncode == 1
        assert "/privacy/sigma" in res.stderr

    def test_missing_scenario_flag_usage(self):
        res = run_cli("pipeline")
        assert res.returncode == 1
        assert "usage" in res.stderr.lower()

    def test_unknown_flag_usage(self):
        res = run_cli("pipeline", "--scenario", str(BASELINE), "--frobnicate")
        assert res.returncode == 1
        assert "usage" in res.stderr.lower()

    def test_unreadable_scenario(self, tmp_path):
        res = run_cli("pipeline", "--scenario", str(tmp_path / "nope.json"),
                      "--out-dir", str(tmp_path))
        assert res.returncode == 1

    def test_numerical_failure_exit_code(self, tmp_path):
        # a zeta override so large even the high type is priced out
        doc = json.loads(BASELINE.read_text())
        doc["screening"]["zeta_override"] = 50.0
        bad = tmp_path / "infeasible.json"
        bad.write_text(json.dumps(doc))
        res = run_cli("screening-menu", "--scenario", str(bad),
                      "--out-dir", str(tmp_path))
        assert res.returncode == 2
        assert "priced out" in res.stderr

    def test_zeta_override_skips_dlc_stage(self, tmp_path):
        doc = json.loads(BASELINE.read_text())
        doc["screening"]["zeta_override"] = 0.31
        scn = tmp_path / "override.json"
        scn.write_text(json.dumps(doc))
        out = tmp_path / "out"
        res = run_cli("pipeline", "--scenario", str(scn),
                      "--out-dir", str(out), "--grid", "501")
        assert res.returncode == 0, res.stderr
        manifest = json.loads((out / "run_manifest.json").read_text())
        assert manifest["zeta"]["source"] == "override"
        assert "overridden" in manifest["zeta"]["note"]
        assert not (out / "dlc_curve.csv").exists()
        assert manifest["status"] == "complete"

    def test_partial_manifest_on_stage_failure(self, tmp_path):
        # valid scenario whose screening stage is infeasible at run time
        doc = json.loads(BASELINE.read_text())
        doc["screening"]["zeta_override"] = 50.0
        scn = tmp_path / "partial.json"
        scn.write_text(json.dumps(doc))
        out = tmp_path / "out"
        res = run_cli("pipeline", "--scenario", str(scn), "--out-dir", str(out))
        assert res.returncode == 2
        manifest = json.loads((out / "run_manifest.json").read_text())
        assert manifest["status"] == "partial"
        assert manifest["failed_stage"] == "screening_menu"
        assert "breach_curve.csv" in manifest["outputs"]

    def test_worker_cap_does_not_change_results(self, tmp_path):
        doc = json.loads(BASELINE.read_text())
        doc["dlc"]["intervals"] = [1, 2]
        doc["dlc"]["restarts"] = 2
        doc["q_map"] = [{"q": 2.0, "interval": 1}, {"q": 5.0, "interval": 2}]
        scn = tmp_path / "small.json"
        scn.write_text(json.dumps(doc))
        import os
        outs = []
        for threads in ("1", "4"):
            env = dict(os.environ, GRIDVEIL_THREADS=threads)
            out = tmp_path / f"out{threads}"
            res = run_cli("dlc-curve", "--scenario", str(scn),
                          "--out-dir", str(out), "--format", "csv", env=env)
            assert res.returncode == 0, res.stderr
            outs.append((out / "dlc_curve.csv").read_bytes())
        assert outs[0] == outs[1]
