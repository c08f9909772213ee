from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURE_CSV = REPO_ROOT / "data" / "facebook_metrics_synthetic.csv"


@pytest.fixture(scope="session")
def fixture_path() -> Path:
    assert FIXTURE_CSV.exists(), "bundled dataset missing; run scripts/make_fixture.py"
    return FIXTURE_CSV
