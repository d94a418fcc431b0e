"""The command line through ``main``: exit codes, report files and determinism."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from finslerlab.cli import main
from finslerlab.report import dumps

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def run_cli(tmp_path, command, scenario, *extra):
    out = tmp_path / "report.json"
    args = [command, "--out", str(out)]
    if scenario is not None:
        args += ["--scenario", str(scenario if isinstance(scenario, Path) else SCENARIOS / scenario)]
    code = main(args + list(extra))
    return code, json.loads(out.read_text())


@pytest.mark.parametrize(
    "command, scenario, want",
    [
        ("surface-report", "helicoid-surface.json", 0),
        ("surface-report", "euclidean-cylinder.json", 0),
        ("validate-metric", "helicoid-metric.json", 0),
        ("validate-metric", "kropina-s3-hopf-metric.json", 0),
        ("validate-metric", "kropina-weak-wind.json", 2),
        ("kropina-compare", "kropina-r3-sphere.json", 0),
        ("kropina-compare", "kropina-s3-clifford.json", 0),
        ("isoparametric-check", "helicoid-linear-field.json", 0),
        ("isoparametric-check", "euclidean-distance-field.json", 0),
        ("isoparametric-check", "negative-control-field.json", 0),
    ],
)
def test_exit_codes(tmp_path, command, scenario, want):
    code, report = run_cli(tmp_path, command, scenario)
    assert code == want
    assert report["command"] == command
    assert report["passed"] is (want == 0)


def test_helicoid_surface_report(tmp_path):
    code, report = run_cli(tmp_path, "surface-report", "helicoid-surface.json")
    assert code == 0
    samples = report["checks"][0]["details"]["samples"]
    assert len(samples) == 25
    for s in samples:
        assert np.allclose(sorted(s["principal_curvatures"]), [-1.0, 1.0], atol=1e-6)


def test_short_wind_is_a_configuration_error(tmp_path, capsys):
    code, report = run_cli(tmp_path, "validate-metric", "kropina-weak-wind.json")
    assert code == 2
    assert report["error"]["type"] == "NotUnitWind"
    assert "NotUnitWind" in capsys.readouterr().err


def test_malformed_scenarios(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli(tmp_path, "validate-metric", bad)[0] == 2
    bad.write_text(json.dumps({"metric": {"kind": "randers"}}))
    assert run_cli(tmp_path, "validate-metric", bad)[0] == 2
    bad.write_text(json.dumps({"metric": {"kind": "euclidean"}}))
    code, report = run_cli(tmp_path, "surface-report", bad)
    assert code == 2 and "surface" in report["error"]["message"]
    bad.write_text(json.dumps({"schema": "finslerlab-scenario/9", "metric": {"kind": "euclidean"}}))
    assert run_cli(tmp_path, "validate-metric", bad)[0] == 2
    assert run_cli(tmp_path, "validate-metric", tmp_path / "missing.json")[0] == 2
    assert run_cli(tmp_path, "validate-metric", None)[0] == 2


def test_unknown_command_rejected_by_parser():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_geometry_failure_exit_code(tmp_path):
    # the sample at polar angle pi has nbar = -W, where the Kropina normal does not exist
    sc = tmp_path / "s.json"
    sc.write_text(json.dumps({
        "metric": {"kind": "kropina", "W": [1.0, 0.0, 0.0]},
        "surface": {"family": "sphere", "radius": 1.0, "u": [2.0, 3.141592653589793, 2], "v": [0.5, 1.0, 2]},
    }))
    code, report = run_cli(tmp_path, "kropina-compare", sc)
    assert code == 1
    assert report["error"]["type"] in ("NormalExcluded", "NoConicNormal", "FrameDegenerate")


def test_unknown_sample_range_rejected(tmp_path):
    sc = tmp_path / "s.json"
    sc.write_text(json.dumps({"metric": {"kind": "euclidean"}, "surface": {"family": "sphere", "t1": [0.1, 1.0, 3]}}))
    code, report = run_cli(tmp_path, "surface-report", sc)
    assert code == 2
    assert "t1" in report["error"]["message"]


@pytest.mark.parametrize("command, scenario", [("surface-report", "helicoid-surface.json"),
                                               ("isoparametric-check", "euclidean-distance-field.json")])
def test_reports_are_deterministic(tmp_path, command, scenario):
    _, first = run_cli(tmp_path, command, scenario)
    _, second = run_cli(tmp_path, command, scenario)
    first.pop("timestamp")
    second.pop("timestamp")
    assert dumps(first) == dumps(second)


def test_default_output_path(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["validate-metric", "--scenario", str(SCENARIOS / "helicoid-metric.json")]) == 0
    assert (tmp_path / "validate-metric-report.json").exists()


def test_expect_false_turns_a_failing_verdict_into_a_pass(tmp_path):
    _, report = run_cli(tmp_path, "isoparametric-check", "negative-control-field.json")
    assert report["passed"]
    raw = json.loads((SCENARIOS / "negative-control-field.json").read_text())
    raw.pop("expect")
    sc = tmp_path / "nc.json"
    sc.write_text(json.dumps(raw))
    assert run_cli(tmp_path, "isoparametric-check", sc)[0] == 1


reals = st.floats(allow_nan=False, allow_infinity=False)


@given(st.recursive(reals | st.integers() | st.booleans() | st.none() | st.text(max_size=5),
                    lambda inner: st.lists(inner, max_size=4) | st.dictionaries(st.text(max_size=4), inner, max_size=4),
                    max_leaves=12))
def test_dumps_round_trips_through_json(obj):
    text = dumps(obj)
    assert json.loads(text) == obj
    assert dumps(json.loads(text)) == text
