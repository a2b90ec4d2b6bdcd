import numpy as np
import pytest

from fuzzymeas.operators import LatticeWindow

SEED = 20240611


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture
def window():
    return LatticeWindow(10)


@pytest.fixture
def ring():
    return LatticeWindow(15, "periodic")


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one pass/fail line; the lines are printed in the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(label, passed, detail):
        lines.append(f"[{'PASS' if passed else 'FAIL'}] criterion {label}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=_label_order):
            terminalreporter.write_line(line)


def _label_order(line):
    label = line.split("criterion ", 1)[1].split(":", 1)[0]
    number = int("".join(ch for ch in label.split("(")[0] if ch.isdigit()))
    return number, label
