import json

import pandas as pd
import pytest

import config
from modules import acceptance, experiment, reconstruct, scene
from modules import visualization as viz
from modules.errors import ContractError, InputError
from modules.report import Report, format_lines


#  Report

def test_duplicate_check_names_are_rejected():
    report = Report("verify")
    report.add("estimation", True, 1e-12)
    with pytest.raises(ContractError):
        report.add("estimation", True, 1e-12)


def test_noise_exempt_failures_do_not_fail_the_report():
    report = Report("pipeline")
    report.add("exact", True, 0.0)
    report.add("monotone", False, noise_exempt=True)
    assert report.passed
    report.add("round_trip", False, 1.0)
    assert not report.passed


def test_timed_block_records_entry():
    report = Report("pipeline")
    with report.timed("block") as entry:
        entry["passed"], entry["margin"] = True, 2.5e-10
    assert report.checks[0]["passed"]
    assert report.checks[0]["margin"] == 2.5e-10
    assert report.checks[0]["seconds"] >= 0.0


def test_timed_block_fails_when_unset():
    report = Report("pipeline")
    with report.timed("block"):
        pass
    assert not report.passed


def test_report_json_carries_version_and_config(tmp_path):
    report = Report("verify", {"seed": 3})
    report.add("x", True, 1.0, detail={"k": 1})
    report.insights.append("note")
    path = report.save(tmp_path / "report.json")
    data = json.loads(path.read_text())
    assert data["version"] == config.VERSION
    assert data["config"] == {"seed": 3}
    assert data["checks"][0]["detail"] == {"k": 1}
    assert report.to_json() == path.read_text()


def test_format_lines_verdict():
    report = Report("verify")
    report.add("good", True, 1e-12)
    report.add("noisy", False, 0.1, noise_exempt=True)
    report.add("bad", False, 0.5)
    lines = format_lines(report)
    assert lines[0].startswith("[PASS] good")
    assert lines[1].startswith("[WARN] noisy")
    assert lines[2].startswith("[FAIL] bad")
    assert lines[-1] == "verify: 1 check(s) failed"


def test_extend_applies_prefix():
    report = Report("verify")
    report.extend({"checks": [{"name": "a", "passed": True}], "insights": ["i"]}, prefix="s1_")
    assert report.checks[0]["name"] == "s1_a"
    assert report.insights == ["i"]


#  Experiment Settings

def test_load_defaults():
    exp = experiment.load(seed=4)
    assert (exp.n, exp.m, exp.alpha) == config.DEFAULT_SHAPE
    assert exp.correspondence_count() == 2 * exp.profile.size


def test_load_file_then_overrides(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps({"seed": 1, "restarts": 5, "sigma": 1e-6}))
    exp = experiment.load(path, seed=9)
    assert (exp.seed, exp.restarts, exp.sigma) == (9, 5, 1e-6)


def test_default_alpha_follows_shape():
    exp = experiment.load(seed=0, n=3, m=(1, 1, 1, 1))
    assert exp.alpha == (1, 1, 1, 1)
    assert exp.twisted_shape


def test_unknown_setting(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps({"seed": 1, "colour": "red"}))
    with pytest.raises(InputError, match="colour"):
        experiment.load(path)


def test_alpha_outside_interior():
    with pytest.raises(ContractError, match="valid profiles"):
        experiment.load(seed=0, alpha=(2, 2, 0))


@pytest.mark.parametrize("overrides", [{"sigma": -1.0}, {"restarts": 0}, {"seeds": 0}])
def test_invalid_numbers(overrides):
    with pytest.raises(InputError):
        experiment.load(seed=0, **overrides)


#  Charts

def test_write_html_uses_title_slug(tmp_path):
    fig = viz.spectrum_chart([1.0, 1e-3, 1e-16], title="Spectrum n3 (2,2)")
    path = viz.write_html(fig, tmp_path)
    assert path.name == "spectrum_n3_2_2.html"
    assert path.exists()


def test_restart_chart_handles_empty_table():
    fig = viz.restart_chart(acceptance.restart_table([]))
    assert fig.layout.title.text


def test_format_number():
    assert viz.format_number(None) == "N/A"
    assert viz.format_number(1234.5, 2) == "1.23e+03"


#  Acceptance Families

def test_oracle_equivalence_on_pair(cfg_pair, profile_pair):
    result = acceptance.oracle_equivalence(cfg_pair, profile_pair, samples=50, seed=0)
    assert all(c["passed"] for c in result["checks"])


def test_jacobian_rank_on_pair(cfg_pair, profile_pair):
    result = acceptance.jacobian_rank(cfg_pair, profile_pair)
    assert result["checks"][0]["passed"]
    assert result["checks"][0]["margin"] == 7.0


def test_estimation_uniqueness_on_pair(cfg_pair, profile_pair):
    result = acceptance.estimation_uniqueness(cfg_pair, profile_pair, seed=5)
    checks = {c["name"]: c for c in result["checks"]}
    assert checks["estimation_n3_m22_a22"]["passed"]
    assert checks["estimation_corank_n3_m22_a22"]["passed"]
    assert isinstance(result["charts"][0].layout.title.text, str)


def test_noise_degradation_table(cfg_pair, profile_pair):
    result = acceptance.noise_degradation(cfg_pair, profile_pair, seed=2, sigmas=[0.0, 1e-6])
    assert isinstance(result["sweep"], pd.DataFrame)
    assert list(result["sweep"]["sigma"]) == [0.0, 1e-6]


def test_restart_table_uses_given_threshold(cfg_pair):
    found = [reconstruct.ReconstructionResult(config=cfg_pair, residual=1e-9, restarts_used=2,
                                              restart_residuals=(1e-9, 1e-3))]
    assert list(acceptance.restart_table(found)["accepted"]) == [True, False]
    assert list(acceptance.restart_table(found, accept_residual=1e-2)["accepted"]) == [True, True]


def test_cremona_systems_record_gap():
    cfg = scene.random_config(2, (1, 1, 1), seed=12)
    result = acceptance.cremona_structure(cfg, points=10, seed=0)
    systems = [c for c in result["checks"] if c["name"].startswith("system_")]
    assert len(systems) == 3
    assert all(c["passed"] for c in systems)
    assert all(0.0 <= c["detail"]["gap"] <= 1.0 for c in systems)


@pytest.mark.slow
def test_twisted_pair_reports_restart_landings():
    cfg = scene.random_config(2, (1, 1, 1), seed=12)
    result = acceptance.twisted_pair(cfg, restarts=20, seed=0)
    checks = {c["name"]: c for c in result["checks"]}
    assert checks["orbits_found_n2"]["passed"]
    reached = checks["orbits_reached_by_restarts_n2"]
    assert reached["noise_exempt"]
    assert len(reached["detail"]["lm_hits"]) == 2


def test_twisted_pair_honours_acceptance_threshold():
    cfg = scene.random_config(2, (1, 1, 1), seed=12)
    result = acceptance.twisted_pair(cfg, restarts=2, seed=0, accept_residual=1e-30)
    found = {c["name"]: c for c in result["checks"]}["orbits_found_n2"]
    assert not found["passed"]
    assert found["detail"]["converged"] is False


def test_relative_to_guards_zero_scale():
    assert config.relative_to(-2.0, 4.0) == 0.5
    assert config.relative_to(1.0, 0.0) == float("inf")


@pytest.mark.parametrize("raw,expected", [("", 1), ("4", 4), ("0", 1), ("many", 1)])
def test_worker_count(monkeypatch, raw, expected):
    monkeypatch.setenv(config.THREADS_ENV, raw)
    assert config.worker_count() == expected


#  Seed Batteries

@pytest.mark.slow
def test_seed_battery_on_pair_shape():
    result = acceptance.seed_battery(3, (2, 2), (2, 2), seeds=20, restarts=50, samples=50)
    checks = {c["name"]: c for c in result["checks"]}
    assert checks["battery_estimation_n3_m22_a22"]["margin"] == 1.0
    reconstruction = checks["battery_reconstruction_n3_m22_a22"]
    assert reconstruction["margin"] >= config.ROUND_TRIP_RATE
    assert reconstruction["passed"]
    assert reconstruction["detail"]["seeds"] == 20
    assert list(result["table"]["family"]) == ["estimation", "reconstruction"]


@pytest.mark.slow
def test_seed_battery_on_twisted_shape():
    result = acceptance.seed_battery(2, (1, 1, 1), (1, 1, 1), seeds=5, restarts=20, samples=50)
    names = {c["name"] for c in result["checks"]}
    assert names == {f"battery_{family}_n2_m111_a111"
                     for family in ("estimation", "reconstruction", "hypersurface", "cremona")}
    assert all(c["passed"] for c in result["checks"])
    assert "seeds converged within 20 restarts" in result["insights"][0]
