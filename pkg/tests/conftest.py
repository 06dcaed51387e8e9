from __future__ import annotations

_acceptance: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    name = report.nodeid.split("::", 1)[1].removeprefix("test_").replace("_", " ")
    if report.when == "call" or report.outcome != "passed":
        if _acceptance.get(name, ("",))[0] != "FAIL":
            detail = " | ".join(report.capstdout.split("\n")).strip(" |")
            if report.failed and report.longrepr is not None:
                msg = str(getattr(report.longrepr, "reprcrash", None) and
                          report.longrepr.reprcrash.message or "")
                detail = " | ".join(x for x in (detail, msg.splitlines()[0] if msg else "") if x)
            _acceptance[name] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, (outcome, detail) in _acceptance.items():
        terminalreporter.write_line(f"{outcome}  {name}" + (f"  ({detail})" if detail else ""))
