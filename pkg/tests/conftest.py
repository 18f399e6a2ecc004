"""Shared fixtures.

The Veterans lung-cancer dataset is not redistributable here, so the tests
that need it skip unless a CSV is supplied.  Point SURVBESA_VETERANS_CSV at
a file with columns f0..f5,time,event (see scripts/make_veterans_csv.py) or
place it at data/veterans.csv in the repository root.
"""

import os
import re
import sys

import pytest

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DEFAULT_VETERANS = os.path.join(REPO_ROOT, "data", "veterans.csv")


@pytest.fixture(scope="session")
def veterans_dataset():
    path = os.environ.get("SURVBESA_VETERANS_CSV", DEFAULT_VETERANS)
    if not os.path.exists(path):
        pytest.skip(
            "Veterans CSV not supplied; set SURVBESA_VETERANS_CSV or add "
            "data/veterans.csv (see scripts/make_veterans_csv.py)"
        )
    from survbesa.cli import load_csv

    data = load_csv(path)
    if data.d != 6:
        pytest.skip(f"expected 6 features in the Veterans CSV, found {data.d}")
    return data


def _criterion_num(nodeid: str) -> str | None:
    match = re.search(r"criterion_(\d+)", nodeid)
    return match.group(1) if match else None


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the per-criterion lines collected by the acceptance tests.

    Passing tests have their stdout captured, so without this the
    `criterion NN: ...` lines would only show for failures.
    """
    mod = sys.modules.get("test_acceptance")
    if mod is None:
        return
    lines = list(getattr(mod, "CRITERION_LINES", []))

    xfailed = {
        _criterion_num(rep.nodeid)
        for rep in terminalreporter.stats.get("xfailed", [])
    }
    lines = [
        line + "  [expected failure, see xfail reason]"
        if any(n and line.startswith(f"criterion {n}:") for n in xfailed)
        else line
        for line in lines
    ]
    for rep in terminalreporter.stats.get("skipped", []):
        num = _criterion_num(rep.nodeid)
        if num is None or "test_acceptance" not in rep.nodeid:
            continue
        reason = rep.longrepr[2] if isinstance(rep.longrepr, tuple) else str(rep.longrepr)
        reason = reason.removeprefix("Skipped: ").splitlines()[0]
        lines.append(f"criterion {num}: SKIP - {reason}")

    if not lines:
        return
    lines.sort(key=lambda line: line.split(":")[0])
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
