import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from trainer_helpers import FIXTURES, run_runtime_cli  # noqa: E402


@pytest.fixture(scope="session")
def fixtures_dir():
    if not FIXTURES.exists():
        pytest.skip("fixture corpus not generated")
    return FIXTURES


@pytest.fixture(scope="session")
def stencil_db_100(tmp_path_factory):
    """100 collected stencil records on an 8x8 grid, written by the runtime."""
    db = tmp_path_factory.mktemp("collect") / "stencil100.srdb"
    run_runtime_cli([
        "bench", "stencil", "--n", "8", "--m", "8", "--steps", "100",
        "--mode", "collect", "--db", str(db), "--seed", "42",
        "--out", str(db.parent / "collect_report.json"),
    ])
    return db
