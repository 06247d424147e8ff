from __future__ import annotations


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    rows = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" in report.nodeid and report.when == "call":
                name = report.nodeid.split("::")[-1]
                rows.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if not rows:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, verdict in rows:
        terminalreporter.write_line(f"{verdict}  {name}")
