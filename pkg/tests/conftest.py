import os
import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from frobpen.exactcas import RMatrix, parse_expr

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=15,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

GOLDEN = Path(__file__).parent / "golden"


def golden_text(name: str) -> str:
    return (GOLDEN / name).read_text()


def golden_matrix(name: str) -> RMatrix:
    """A hand-encoded matrix: one row per line, entries separated by ';'."""
    rows = [line for line in golden_text(name).splitlines() if line.strip()]
    return RMatrix([[parse_expr(e) for e in row.split(";")] for row in rows])


def golden_blocks(name: str) -> dict[str, list[str]]:
    """Sections of a golden file: a title line followed by bracketed rows."""
    out: dict[str, list[str]] = {}
    key = None
    for line in golden_text(name).splitlines():
        if line.startswith("["):
            out[key].append(line)
        elif line.strip():
            key = line.strip()
            out[key] = []
    return out


@pytest.fixture
def rng():
    return random.Random(20240611)


# one summary line per acceptance criterion; a criterion passes when all its tests pass
# (strict xfails count as expected)
_CRITERIA: dict[int, list[str]] = {}


def pytest_runtest_logreport(report):
    marks = getattr(report, "criterion", None)
    if marks is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if hasattr(report, "wasxfail"):
            outcome = "xfail" if report.skipped else "xpass"
        else:
            outcome = report.outcome
        _CRITERIA.setdefault(marks, []).append(outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    m = item.get_closest_marker("criterion")
    if m is not None:
        outcome.get_result().criterion = m.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        outs = _CRITERIA[k]
        ok = all(o in ("passed", "xfail") for o in outs)
        note = " (literal check is an expected failure)" if "xfail" in outs else ""
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}{note}")
