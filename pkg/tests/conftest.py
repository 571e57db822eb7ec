import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One [PASS]/[FAIL] line per acceptance criterion."""
    import test_acceptance

    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" not in report.nodeid:
                continue
            if getattr(report, "when", "call") != "call" and outcome == "passed":
                continue
            fn = getattr(test_acceptance, report.nodeid.split("::")[-1], None)
            name = getattr(fn, "_criterion", report.nodeid)
            status = "PASS" if outcome == "passed" else "FAIL"
            entry = f"[{status}] {name}"
            if entry not in lines:
                lines.append(entry)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
