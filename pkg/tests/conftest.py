import os
import subprocess
import sys

import numpy as np
import pytest


@pytest.fixture
def gen():
    return np.random.default_rng(20240611)


def run_numpy_backend(code: str) -> str:
    """Run a snippet in a fresh interpreter with the compiled kernels disabled."""
    env = dict(os.environ, PHASEBENCH_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, timeout=600)
    assert out.returncode == 0, out.stderr
    return out.stdout


@pytest.fixture
def numpy_backend():
    return run_numpy_backend


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(capsys):
    """Print one pass/fail line per acceptance criterion, then assert it."""

    def report(number: int, checks: dict, detail: str = ""):
        ok = all(checks.values())
        failed = [k for k, v in checks.items() if not v]
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}"
        if failed:
            line += f" (failed: {', '.join(failed)})"
        if detail:
            line += f" | {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
