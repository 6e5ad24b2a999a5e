"""Prints the acceptance checklist after a run that touched the gate."""

_GATE_FILE = "test_acceptance.py"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows: dict[str, str] = {}
    for category, status in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(category, []):
            if _GATE_FILE not in report.nodeid:
                continue
            name = report.nodeid.split("::")[-1]
            # keep a FAIL from setup/teardown over an earlier PASS
            if rows.get(name) != "FAIL":
                rows[name] = status
    if not rows:
        return
    terminalreporter.section("acceptance checklist")
    for name, status in rows.items():
        text = name.removeprefix("test_").replace("_", " ")
        terminalreporter.write_line(f"{status}  {text}")
