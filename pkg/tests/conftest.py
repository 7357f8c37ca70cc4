import re

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None)
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", "call") != "call" and outcome != "error":
                continue
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" not in props:
                continue
            status = "PASS" if outcome == "passed" else "FAIL"
            lines.append((props["criterion"], f"criterion {props['criterion']:>2}: {status}  "
                          f"{props.get('title', '')}  [{props.get('detail', '')}]"))
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request, record_property):
    """Tag the test with its criterion number; returns a detail recorder."""
    marker = request.node.get_closest_marker("acceptance")
    number = marker.args[0]
    record_property("criterion", number)
    record_property("title", re.sub(r"^test_c\d+_", "", request.node.name).replace("_", " "))

    def detail(text):
        record_property("detail", text)
    return detail
