import os
import sys
from pathlib import Path

sys.path.insert(0, os.path.dirname(__file__))

DATA = Path(__file__).parent / "data"


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
