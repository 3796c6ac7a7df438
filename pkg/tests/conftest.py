import pytest

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}
_OUTCOMES: dict[int, str] = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (bool(passed), detail)


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if name.startswith("test_criterion_") and report.when == "call":
        _OUTCOMES[int(name.split("_")[2])] = report.outcome


def pytest_terminal_summary(terminalreporter):
    seen = sorted(set(ACCEPTANCE) | set(_OUTCOMES))
    if not seen:
        return
    terminalreporter.section("acceptance criteria")
    for n in seen:
        passed, detail = ACCEPTANCE.get(n, (False, "no result recorded"))
        if _OUTCOMES.get(n) == "failed" and n not in ACCEPTANCE:
            detail = "test raised before recording a result"
        status = "PASS" if passed and _OUTCOMES.get(n) != "failed" else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {detail}")


@pytest.fixture
def acceptance():
    return record
