import pytest

# (criterion number, "PASS" | "FAIL", short description) tuples appended by
# tests/test_acceptance.py; printed as one line per criterion after the run.
ACCEPTANCE_RESULTS: list[tuple[int, str, str]] = []


def pytest_addoption(parser):
    parser.addoption(
        "--runslow",
        action="store_true",
        default=False,
        help="also run tests marked slow (full-scale pipeline runs)",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, verdict, text in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[ACCEPTANCE] criterion {number:2d}: {verdict} - {text}")
