import csv
import json

import pytest

from conftest import write_json
from lifeindex.allocator import grid_oracle
from lifeindex.cli import main
from lifeindex.profiles_io import load_scenario
from lifeindex.reports import REPORT_FIELDS, evaluate

FAST = ["--samples", "20000", "--seed", "3"]


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_evaluate_sweden_like_perfect_ensurance(capsys):
    code, out, _ = run(["evaluate", "@sweden_like", *FAST], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["p_ei"] == 1.0
    assert list(report) == sorted(report)
    assert set(report) == set(REPORT_FIELDS)


def test_evaluate_deterministic_bytes(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["evaluate", "@us_like", *FAST, "--out", a], capsys)[0] == 0
    assert run(["evaluate", "@us_like", *FAST, "--out", b], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_evaluate_quadrature_flag(capsys, data_dir):
    code, out, _ = run(["evaluate", "@us_like", "--quadrature"], capsys)
    assert code == 0
    quad = evaluate(load_scenario(data_dir / "us_like.scenario.json"), quadrature=True)
    assert json.loads(out)["p_ei"] == quad.p_ei


def test_zero_essential_doctors_still_reports(tmp_path, minimal_profile_doc, capsys):
    minimal_profile_doc["essential"]["doctors"] = 0.0
    write_json(tmp_path / "p.json", minimal_profile_doc)
    scen = write_json(tmp_path / "s.json", {
        "profile_ref": "p.json",
        "coefficients": {"k_N": 3000, "k_M": 300},
        "saturation": {"k_essential": [2, 5, 3], "k_complementary": [8, 25, 18]},
    })
    code, out, _ = run(["evaluate", scen, *FAST], capsys)
    assert code == 0
    report = json.loads(out)
    # essential term is zero, complementary term remains
    assert report["p_mr"] == pytest.approx((0.5 / 8.5) * (1 / 26) * (0.5 / 18.5), rel=1e-12)


def test_validation_failure_exit_code(tmp_path, minimal_profile_doc, capsys):
    minimal_profile_doc["essential"]["beds"] = -2
    write_json(tmp_path / "p.json", minimal_profile_doc)
    scen = write_json(tmp_path / "s.json", {"profile_ref": "p.json", "coefficients": {"k_N": 1, "k_M": 1}})
    code, _, err = run(["evaluate", scen], capsys)
    assert code == 1
    assert "essential.beds" in err


def test_json_error_format(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{ nope")
    code, _, err = run(["--error-format", "json", "evaluate", bad], capsys)
    assert code == 1
    doc = json.loads(err)
    assert doc["error"] == "ParseError" and doc["line"] == 1


def test_numerical_failure_exit_code(scenario_files, capsys):
    # the profile has no data for 1990, a computation-stage error
    code, _, err = run(["evaluate", scenario_files, "--year", "1990", *FAST], capsys)
    assert code == 2
    assert "1990" in err


def test_usage_errors_exit_one(capsys):
    assert run(["evaluate"], capsys)[0] == 1
    assert run(["compare", "@us_like"], capsys)[0] == 1
    assert run(["optimize", "@us_like", "--solver", "magic"], capsys)[0] == 1


def test_compare_ranking_and_outputs(tmp_path, capsys):
    prefix = tmp_path / "cmp"
    code, _, _ = run(["compare", "@china_like", "@sweden_like", "@us_like", "--quadrature", "--out", prefix], capsys)
    assert code == 0
    doc = json.loads((tmp_path / "cmp.json").read_text())
    assert [r["country"].split("-")[0] for r in doc["rows"]] == ["China", "Sweden", "US"]
    assert [c.split("-")[0] for c in doc["ranking"]] == ["Sweden", "US", "China"]
    with open(tmp_path / "cmp.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["rank"] for r in rows] == ["3", "1", "2"]
    assert set(REPORT_FIELDS) <= set(rows[0])
    with open(tmp_path / "cmp_long.csv") as fh:
        long = list(csv.DictReader(fh))
    assert len(long) == 3 * 10
    assert {r["metric"] for r in long} >= {"l_index", "p_ei", "luxury_index"}


def test_compare_duplicate_rows_stable(tmp_path, capsys):
    prefix = tmp_path / "dup"
    assert run(["compare", "@us_like", "@us_like", *FAST, "--out", prefix], capsys)[0] == 0
    doc = json.loads((tmp_path / "dup.json").read_text())
    a, b = doc["rows"]
    assert {k: v for k, v in a.items() if k not in ("rank", "input_index")} == {
        k: v for k, v in b.items() if k not in ("rank", "input_index")
    }
    assert (a["rank"], b["rank"]) == (1, 2)


def test_compare_failure_names_file(tmp_path, capsys):
    code, _, err = run(["compare", "@us_like", tmp_path / "missing.json", *FAST], capsys)
    assert code == 1
    assert "missing.json" in err


def test_history_single_year_matches_evaluate(capsys):
    code, out, _ = run(["history", "@us_like", "--from", 2010, "--to", 2010, *FAST], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.splitlines()))
    assert len(rows) == 1
    code, ev, _ = run(["evaluate", "@us_like", "--year", 2010, *FAST], capsys)
    report = json.loads(ev)
    for field in REPORT_FIELDS:
        if field == "warnings":
            assert rows[0][field] == "; ".join(report[field])
        elif isinstance(report[field], float):
            assert float(rows[0][field]) == report[field]
        else:
            assert rows[0][field] == str(report[field])


def test_history_strict_names_earliest_year(tmp_path, minimal_profile_doc, capsys):
    minimal_profile_doc["history"] = [{"year": 1999}]
    write_json(tmp_path / "p.json", minimal_profile_doc)
    scen = write_json(tmp_path / "s.json", {"profile_ref": "p.json", "coefficients": {"k_N": 3000, "k_M": 300}})
    code, _, err = run(["history", scen, "--from", 1999, "--to", 2000, *FAST], capsys)
    assert code == 2
    assert "1974" in err
    assert "earliest computable year is 2000" in err

    code, out, err = run(["history", scen, "--from", 1999, "--to", 2000, "--lenient", *FAST], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.splitlines()))
    assert [r["year"] for r in rows] == ["2000"]
    assert "warning" in err and "1999" in err


def test_history_constant_research_constant_p_tech(tmp_path, minimal_profile_doc, capsys):
    minimal_profile_doc["research"] = [{"year": y, "staff": 5000, "funding": 200} for y in range(1960, 2001)]
    minimal_profile_doc["history"] = [{"year": y, "per_capita_gdp": 15000 + 100 * (y % 7)} for y in range(1990, 2000)]
    write_json(tmp_path / "p.json", minimal_profile_doc)
    scen = write_json(tmp_path / "s.json", {"profile_ref": "p.json", "coefficients": {"k_N": 3000, "k_M": 300}})
    code, out, _ = run(["history", scen, "--from", 1990, "--to", 2000, "--quadrature"], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.splitlines()))
    assert len(rows) == 11
    assert len({r["p_tech"] for r in rows}) == 1


def test_optimize_300b(tmp_path, capsys):
    out = tmp_path / "plan.json"
    code, table, _ = run(["optimize", "@us_like", "--budget", 300000, "--out", out], capsys)
    assert code == 0
    plan = json.loads(out.read_text())
    assert plan["feasible"] is True
    assert abs(plan["allocation_sum"] - 300000) <= 300000 * 1e-12
    assert "research_funding" in table


def test_optimize_one_step_single_category(tmp_path, capsys):
    out = tmp_path / "plan.json"
    code, _, _ = run(["optimize", "@us_like", "--budget", 1000, "--step", 1000, "--solver", "greedy", "--out", out], capsys)
    assert code == 0
    plan = json.loads(out.read_text())
    assert sum(1 for v in plan["allocation"].values() if v > 0) == 1


def test_optimize_grid_matches_oracle(tmp_path, capsys, data_dir):
    out = tmp_path / "plan.json"
    argv = ["optimize", "@us_like", "--solver", "grid", "--dims", "1,2,3", "--chunks", 10, "--budget", 50000, "--out", out]
    assert run(argv, capsys)[0] == 0
    prob = load_scenario(data_dir / "us_like.scenario.json").allocation_problem(50000)
    oracle = grid_oracle(prob, (1, 2, 3), 10)
    assert json.loads(out.read_text())["objective"] == oracle.objective


def test_optimize_infeasible_names_constraint(capsys):
    code, _, err = run(["optimize", "@us_like", "--dims", "1", "--budget", 400000], capsys)
    assert code == 2
    assert "aid_cap" in err


def test_optimize_needs_allocation_block(capsys):
    code, _, err = run(["optimize", "@sweden_like"], capsys)
    assert code == 1
    assert "allocation" in err


def test_config_dir_env(tmp_path, scenario_files, monkeypatch, capsys):
    monkeypatch.setenv("LIFEINDEX_CONFIG_DIR", str(scenario_files.parent))
    monkeypatch.chdir(tmp_path.parent)
    code, out, _ = run(["evaluate", scenario_files.name, *FAST], capsys)
    assert code == 0
    assert json.loads(out)["country"] == "Testland"


def test_reports_self_consistent(capsys):
    for name in ("@us_like", "@china_like", "@sweden_like"):
        code, out, _ = run(["evaluate", name, *FAST], capsys)
        r = json.loads(out)
        assert abs(r["l_index"] - r["q_life"] * r["e_life"]) <= 1e-12
        assert abs(r["q_life"] - (r["p_mr"] + r["p_ei"] + r["p_tech"]) / 4.0) <= 1e-12


def test_matching_warning_goes_to_stderr(tmp_path, minimal_profile_doc, capsys):
    minimal_profile_doc["per_capita_gdp"] = 5
    write_json(tmp_path / "p.json", minimal_profile_doc)
    scen = write_json(tmp_path / "s.json", {"profile_ref": "p.json", "coefficients": {"k_N": 3000, "k_M": 300}})
    code, out, err = run(["evaluate", scen, *FAST], capsys)
    assert code == 0
    assert "matching degree" in err
    assert json.loads(out)["warnings"]
