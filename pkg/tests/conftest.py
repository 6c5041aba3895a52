"""Prints one PASS/FAIL line per acceptance criterion after the run.

The acceptance tests in test_acceptance.py are the go / no-go gate for the
package; their outcomes are echoed in a dedicated summary block so they are
visible regardless of pytest's output capturing.
"""

_acceptance_outcomes = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    if "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance_outcomes.append((name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _acceptance_outcomes:
        tag = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{tag} {name}")
