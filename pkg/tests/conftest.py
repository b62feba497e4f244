import sys

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def room(w, h, fill=".", extra=None, header=None, path=None):
    """Text of a walled ``w`` x ``h`` room; ``extra`` maps (x, y) -> char."""
    grid = [["#" if x in (0, w - 1) or y in (0, h - 1) else fill for x in range(w)]
            for y in range(h)]
    for (x, y), c in (extra or {}).items():
        grid[y][x] = c
    text = (header or f"{w} {h} 4 0.1 0") + "\n" + "\n".join("".join(r) for r in grid) + "\n"
    if path:
        text += "path " + " ".join(f"{v:g}" for p in path for v in p) + "\n"
    return text


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
