import os
import sys
from pathlib import Path

# heavy suites share spectra through the on-disk cache unless told otherwise
os.environ.setdefault("LAB_CACHE_DIR", str(Path(__file__).resolve().parents[1] / ".cache"))


def pytest_terminal_summary(terminalreporter):
    # one line per acceptance criterion, in the order the tests ran
    for mod in list(sys.modules.values()):
        if getattr(mod, "__name__", "").endswith("test_acceptance") and getattr(mod, "LINES", None):
            terminalreporter.section("acceptance")
            for line in mod.LINES:
                terminalreporter.write_line(line)
