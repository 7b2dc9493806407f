import re

_CRITERIA = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        msg = ""
        if report.failed and report.longrepr is not None:
            crash = getattr(report.longrepr, "reprcrash", None)
            msg = crash.message.splitlines()[0] if crash else str(report.longrepr).splitlines()[-1]
        _CRITERIA[key] = ("PASS" if report.passed else "FAIL", msg)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (n, name), (status, msg) in sorted(_CRITERIA.items()):
        line = f"criterion {n} ({name.replace('_', ' ')}): {status}"
        terminalreporter.write_line(line + (f"  [{msg}]" if msg else ""))
