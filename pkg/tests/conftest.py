import copy
import json
from pathlib import Path

import pytest

from lifeindex.cli import DATA_DIR


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture()
def us_profile_doc(data_dir) -> dict:
    return json.loads((data_dir / "us_like.profile.json").read_text())


@pytest.fixture()
def us_scenario_doc(data_dir) -> dict:
    return json.loads((data_dir / "us_like.scenario.json").read_text())


@pytest.fixture()
def minimal_profile_doc() -> dict:
    """Smallest valid profile: a three-year research series and no history."""
    return copy.deepcopy(
        {
            "name": "Testland",
            "year": 2000,
            "population": 1000,
            "per_capita_gdp": 20000,
            "essential": {"doctors": 2.0, "nurses": 5.0, "beds": 3.0},
            "complementary": {"doctors": 0.5, "nurses": 1.0, "beds": 0.5},
            "insurance": {"n_insured": 900, "n_uninsured": 100},
            "population_model": {
                "lambda_med": 800,
                "mu_inc": 3000,
                "sigma_inc": 1000,
                "essential_expense": 2500,
                "k_gov": 0.3,
            },
            "research": [
                {"year": 1975, "staff": 1000, "funding": 50},
                {"year": 1999, "staff": 2000, "funding": 80},
                {"year": 2000, "staff": 2100, "funding": 90},
            ],
            "urban_rural": {"rural_beds": 2.0, "urban_beds": 4.0},
        }
    )


def write_json(path: Path, doc) -> Path:
    path.write_text(json.dumps(doc, indent=2))
    return path


@pytest.fixture()
def scenario_files(tmp_path, minimal_profile_doc):
    """A profile and a scenario referencing it, both in ``tmp_path``."""
    write_json(tmp_path / "testland.profile.json", minimal_profile_doc)
    scenario = {
        "profile_ref": "testland.profile.json",
        "coefficients": {"k_N": 3000, "k_M": 300},
    }
    return write_json(tmp_path / "testland.scenario.json", scenario)
