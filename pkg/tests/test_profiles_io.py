import json
import os

import pytest

from conftest import write_json
from lifeindex.errors import (
    CoverageError,
    FileAccessError,
    ParseError,
    ResolutionError,
    ValidationError,
)
from lifeindex.model_core import ResourceBundle
from lifeindex.profiles_io import (
    load_profile,
    load_scenario,
    profile_from_document,
    save_profile,
)


def _issue_paths(exc_info):
    return [p for p, _ in exc_info.value.issues]


def test_minimal_profile_loads(tmp_path, minimal_profile_doc):
    prof = load_profile(write_json(tmp_path / "p.json", minimal_profile_doc))
    assert prof.name == "Testland"
    assert prof.essential == ResourceBundle(2.0, 5.0, 3.0)
    assert prof.insurance == (900.0, 100.0)
    assert prof.population_model.n_uninsured == 100.0
    assert prof.population_model.money_quantum == 1.0
    assert prof.research.years == (1975, 1999, 2000)


def test_round_trip_and_byte_identical(tmp_path, minimal_profile_doc):
    prof = load_profile(write_json(tmp_path / "p.json", minimal_profile_doc))
    save_profile(prof, tmp_path / "a.json")
    save_profile(prof, tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert load_profile(tmp_path / "a.json") == prof


def test_shipped_profiles_round_trip(tmp_path, data_dir):
    for path in sorted(data_dir.glob("*.profile.json")):
        prof = load_profile(path)
        assert prof.synthetic
        save_profile(prof, tmp_path / path.name)
        again = load_profile(tmp_path / path.name)
        assert again == prof
        for year in prof.years():
            assert again.for_year(year) == prof.for_year(year)


def test_saved_floats_keep_full_precision(tmp_path, minimal_profile_doc):
    minimal_profile_doc["essential"]["doctors"] = 0.1 + 0.2
    prof = profile_from_document(minimal_profile_doc)
    save_profile(prof, tmp_path / "p.json")
    assert load_profile(tmp_path / "p.json").essential.doctors == 0.1 + 0.2


def test_insurance_mismatch_names_insurance(minimal_profile_doc):
    minimal_profile_doc["insurance"]["n_uninsured"] = 99
    with pytest.raises(ValidationError) as info:
        profile_from_document(minimal_profile_doc)
    assert "insurance" in _issue_paths(info)


def test_negative_bed_density_named(minimal_profile_doc):
    minimal_profile_doc["essential"]["beds"] = -1.0
    with pytest.raises(ValidationError) as info:
        profile_from_document(minimal_profile_doc)
    assert "essential.beds" in _issue_paths(info)


def test_all_issues_reported_together(minimal_profile_doc):
    doc = minimal_profile_doc
    doc["essential"]["beds"] = -1.0
    doc["population_model"]["k_gov"] = 2.0
    doc["urban_rural"]["urban_beds"] = 0
    doc["research"][1]["year"] = 1970
    doc["surprise"] = 1
    del doc["per_capita_gdp"]
    with pytest.raises(ValidationError) as info:
        profile_from_document(doc)
    paths = _issue_paths(info)
    for expected in (
        "essential.beds",
        "population_model.k_gov",
        "urban_rural.urban_beds",
        "research[1].year",
        "surprise",
        "per_capita_gdp",
    ):
        assert expected in paths


def test_wrong_units_rejected(minimal_profile_doc):
    minimal_profile_doc["units"] = {"money": "EUR"}
    with pytest.raises(ValidationError) as info:
        profile_from_document(minimal_profile_doc)
    assert "units.money" in _issue_paths(info)


def test_type_errors_reported(minimal_profile_doc):
    minimal_profile_doc["population"] = "many"
    minimal_profile_doc["synthetic"] = "yes"
    with pytest.raises(ValidationError) as info:
        profile_from_document(minimal_profile_doc)
    assert {"population", "synthetic"} <= set(_issue_paths(info))


def test_parse_error_has_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "name": "x",\n  "year": ,\n}')
    with pytest.raises(ParseError) as info:
        load_profile(path)
    assert info.value.line == 3
    assert info.value.column is not None


def test_missing_file(tmp_path):
    with pytest.raises(FileAccessError):
        load_profile(tmp_path / "nope.json")


def test_save_to_unwritable_path(tmp_path, minimal_profile_doc):
    prof = profile_from_document(minimal_profile_doc)
    with pytest.raises(FileAccessError) as info:
        save_profile(prof, tmp_path / "missing_dir" / "p.json")
    assert "missing_dir" in str(info.value)


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_save_to_read_only_dir(tmp_path, minimal_profile_doc):
    prof = profile_from_document(minimal_profile_doc)
    ro = tmp_path / "ro"
    ro.mkdir()
    ro.chmod(0o500)
    try:
        with pytest.raises(FileAccessError):
            save_profile(prof, ro / "p.json")
    finally:
        ro.chmod(0o700)


def test_history_overrides_and_coverage(minimal_profile_doc):
    minimal_profile_doc["history"] = [
        {"year": 1999, "per_capita_gdp": 19000, "essential": {"doctors": 1.5}},
    ]
    prof = profile_from_document(minimal_profile_doc)
    old = prof.for_year(1999)
    assert old.per_capita_gdp == 19000.0
    assert old.essential == ResourceBundle(1.5, 5.0, 3.0)
    assert prof.for_year(2000) is prof
    with pytest.raises(CoverageError) as info:
        prof.for_year(1998)
    assert info.value.year == 1998


def test_history_snapshots_validated(minimal_profile_doc):
    minimal_profile_doc["history"] = [
        {"year": 1999, "population": 500},
        {"year": 1999, "per_capita_gdp": 1},
    ]
    with pytest.raises(ValidationError) as info:
        profile_from_document(minimal_profile_doc)
    paths = _issue_paths(info)
    assert "history[0].insurance" in paths
    assert "history[1].year" in paths


def test_scenario_resolves_sibling_profile(scenario_files):
    scen = load_scenario(scenario_files)
    assert scen.profile.name == "Testland"
    assert scen.allocation is None
    assert scen.coefficients.k_N == 3000.0
    # saturation defaults: k_e = baseline essential densities, k_c calibrated
    assert scen.saturation.k_essential == (2.0, 5.0, 3.0)
    assert scen.saturation.k_complementary == pytest.approx((8.0, 25.0, 18.0))


def test_scenario_relative_to_its_directory(tmp_path, scenario_files, monkeypatch):
    other = tmp_path / "elsewhere"
    other.mkdir()
    monkeypatch.chdir(other)
    assert load_scenario(scenario_files).profile.name == "Testland"


def test_dangling_profile_ref(tmp_path):
    path = write_json(tmp_path / "s.json", {"profile_ref": "ghost.json", "coefficients": {"k_N": 1, "k_M": 1}})
    with pytest.raises(ResolutionError) as info:
        load_scenario(path)
    assert "ghost.json" in str(info.value)


def test_scenario_validation_collects(tmp_path, scenario_files):
    doc = json.loads(scenario_files.read_text())
    doc["coefficients"]["k_q"] = -1
    doc["saturation"] = {"k_complementary": [1, 2]}
    doc["allocation"] = {"f_total": 10, "s_salary": 0.1}
    doc["metadata"] = {"source": 3}
    with pytest.raises(ValidationError) as info:
        load_scenario(write_json(scenario_files, doc))
    paths = _issue_paths(info)
    for expected in ("coefficients.k_q", "saturation.k_complementary", "allocation.f_med", "metadata.source"):
        assert expected in paths


def test_us_scenario_allocation_problem(data_dir):
    scen = load_scenario(data_dir / "us_like.scenario.json")
    prob = scen.allocation_problem(300_000)
    assert prob.f_total == 300_000
    assert prob.p_uninsure == pytest.approx(30e6 / 331e6)
    assert 0 < prob.e_indicator < 1
    assert prob.baseline[3] == pytest.approx(60000 * 2.6)
    assert scen.metadata["provenance"].startswith("SYNTHETIC")


def test_evaluation_only_scenario_has_no_problem(scenario_files):
    with pytest.raises(ValidationError):
        load_scenario(scenario_files).allocation_problem()


def test_shipped_scenarios_share_saturation(data_dir):
    sats = {load_scenario(p).saturation for p in data_dir.glob("*.scenario.json")}
    assert len(sats) == 1
    sweden = load_scenario(data_dir / "sweden_like.scenario.json")
    assert sweden.profile.n_uninsured == 0
