import os
from pathlib import Path

import pytest

ACCEPTANCE_RESULTS: dict = {}


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run long training tests (tens of minutes to hours)")


def runslow_enabled(config) -> bool:
    return bool(config.getoption("--runslow") or os.environ.get("TIMO_PINN_RUNSLOW"))


def pytest_collection_modifyitems(config, items):
    if runslow_enabled(config):
        return
    skip = pytest.mark.skip(reason="long training run; use --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in range(1, 9):
        status, detail = ACCEPTANCE_RESULTS.get(key, ("SKIP", "not run in this session"))
        terminalreporter.write_line(f"[{status}] criterion {key}: {detail}")


@pytest.fixture(scope="session")
def runs_dir():
    """Where long acceptance runs live; reused when the config matches."""
    return Path(os.environ.get("TIMO_PINN_RUNS", Path(__file__).parent.parent / "runs"))
