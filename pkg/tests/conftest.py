from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def gbp_ticks_path() -> Path:
    return FIXTURES / "gbp_ticks.csv"
