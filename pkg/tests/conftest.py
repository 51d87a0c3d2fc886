"""Shared fixtures and the acceptance-criteria summary hook.

``test_acceptance.py`` records one verdict per criterion through the
``acceptance_record`` fixture; after the run the terminal summary prints a
single PASS/FAIL line for each expected criterion so the final report is
readable without digging through pytest output.
"""

import pytest

EXPECTED_CRITERIA = (
    "basic-exact-stop",
    "reference-basic-869",
    "reference-fault-tolerant-897",
    "persistence-bound-and-tightness",
    "no-early-termination",
    "ft-exact-stop",
    "reduced-computation-savings",
    "detector-soundness",
    "admm-end-to-end",
    "parallel-serial-equivalence",
)


def pytest_configure(config):
    config._acceptance_lines = {}


@pytest.fixture(scope="session")
def acceptance_record(request):
    lines = request.config._acceptance_lines

    def record(criterion: str, passed: bool, detail: str) -> None:
        assert criterion in EXPECTED_CRITERIA, criterion
        lines[criterion] = (bool(passed), detail)

    return record


@pytest.fixture(scope="session")
def reference_result():
    """The full reference table, run once per session."""
    from termnet.campaign import run_reference_campaign

    return run_reference_campaign(include_basic=True)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name in EXPECTED_CRITERIA:
        if name in lines:
            passed, detail = lines[name]
            tag = "PASS" if passed else "FAIL"
        else:
            tag, detail = "FAIL", "criterion did not run"
        terminalreporter.write_line(f"[{tag}] {name}: {detail}")
