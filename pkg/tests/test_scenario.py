import json

import pytest

from sasakilift.report import emit_report, strip_timestamps
from sasakilift.scenario import SUITES, Scenario, ScenarioError, load_scenario, run_scenario, scenario_from_dict


def test_flat_all_suites_pass():
    rep = run_scenario(Scenario("flat", {"n": 1}, points=50, seed=7))
    assert rep.ok, [(e.label, e.residual) for e in rep.failures()]
    suites = {e.label.split(".")[0] for e in rep.entries}
    assert suites == set(SUITES)
    d = json.loads(emit_report(rep))
    assert d["schema"] == "1" and d["summary"]["failed"] == 0
    assert all(e["anchor"] for e in d["entries"])


def test_fubini_study_phi_sectional_value():
    rep = run_scenario(Scenario("fubini-study", {"n": 1}, ("phi-sectional",), points=20))
    assert rep["phi-sectional.constant"].value == pytest.approx(1.0, abs=1e-6)


def test_gaussian_soliton_finding():
    rep = run_scenario(Scenario("gaussian", {"n": 1, "lam": 1.0}, ("soliton",), points=20))
    f = next(f for f in rep.findings if f.label == "soliton_constants")
    assert f.values["fitted_lambda"] == pytest.approx(-1.0, abs=1e-6)
    assert {"stated_triple", "slot_derived_triple", "fitted_C1", "fitted_C2"} <= set(f.values)


def test_homothety_finding_recorded():
    rep = run_scenario(Scenario("flat", {}, ("homothety",), points=5))
    f = next(f for f in rep.findings if f.label == "homothety_published_coefficients")
    assert f.values["published_curvature_residual"] > 1e-3
    assert rep.ok


def test_deterministic():
    sc = Scenario("cigar", {}, ("soliton", "homothety", "symmetry"), points=10, seed=3)
    a = strip_timestamps(emit_report(run_scenario(sc)))
    b = strip_timestamps(emit_report(run_scenario(sc)))
    assert a == b


def test_precondition_becomes_failed_entry():
    rep = run_scenario(Scenario("fubini-study", {"n": 2}, ("eta-einstein",), points=4,
                                tolerances={"default": 1e-7}))
    assert rep.ok  # einstein constant known
    rep = run_scenario(Scenario("cigar", {}, ("phi-sectional", "eta-einstein"), points=4))
    assert rep.ok
    rep = run_scenario(Scenario("flat", {"n": 1}, ("sasakian",), points=3, tolerances={"sasakian": 1e-30}))
    assert not rep.ok


def test_symmetry_negative_control_and_skips():
    rep = run_scenario(Scenario("flat", {"n": 1}, ("symmetry",), points=10))
    probe = rep["symmetry.rotation.sign_probe"]
    assert probe.passed and probe.value > 1e-3
    skipped = next(f for f in rep.findings if f.label == "symmetry_skipped")
    assert any("euler" in s for s in skipped.values["skipped"])


def test_validation_errors():
    with pytest.raises(ScenarioError):
        Scenario("flat", suites=("nope",))
    with pytest.raises(ScenarioError):
        Scenario("flat", points=0)
    with pytest.raises(ScenarioError):
        Scenario("flat", tolerances={"sasakian": -1.0})
    with pytest.raises(ScenarioError):
        Scenario("flat", homothety_grid=((0.0, 1.0),))
    with pytest.raises(ScenarioError):
        run_scenario(Scenario("torus"))
    with pytest.raises(ScenarioError):
        scenario_from_dict({"run": {}})
    with pytest.raises(ScenarioError):
        scenario_from_dict({"manifold": {"name": "flat"}, "extra": {}})


def test_load_example_file(tmp_path):
    sc = load_scenario("scenarios/gaussian.toml")
    assert sc.manifold == "gaussian" and sc.params == {"n": 1, "lam": 1.0} and sc.seed == 7
    assert sc.suites == SUITES and len(sc.homothety_grid) == 9
    bad = tmp_path / "bad.toml"
    bad.write_text("[manifold\nname=")
    with pytest.raises(ScenarioError):
        load_scenario(str(bad))
    with pytest.raises(ScenarioError):
        load_scenario(str(tmp_path / "missing.toml"))
