import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_acceptance: dict = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    passed = call.excinfo is None
    rec = _acceptance.setdefault(number, {"title": title, "parts": []})
    rec["parts"].append((item.name, passed))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_acceptance):
        rec = _acceptance[number]
        ok = all(p for _, p in rec["parts"])
        tr.write_line(f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {rec['title']}")
        if not ok:
            for name, p in rec["parts"]:
                if not p:
                    tr.write_line(f"             failing part: {name}")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(12345)
