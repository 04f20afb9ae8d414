import json
import math
from pathlib import Path

import numpy as np
import pytest

from hqcqp import Mode, QQ2Problem

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
R2 = math.sqrt(2.0)


def four_minima(mode=Mode.EQUALITY):
    A0 = np.array([[0, .5, 0], [.5, 0, 1.5], [0, 1.5, 0]])
    return QQ2Problem(A0, np.eye(3), np.diag([-20., 0, 10]), mode)


def flat_curve(mode=Mode.EQUALITY):
    A0 = np.array([[-R2, .5, 0], [.5, 0, 0], [0, 0, 0]])
    return QQ2Problem(A0, np.eye(3), np.diag([2, .5, 1.]), mode)


def four_minima_point(branch: str, t: float):
    """Points of the two intersection curves of the sphere with -20 x1^2 + 10 x3^2 = 1,
    parametrized by x1 = t, on the branch (I or II) that carries the minimizers."""
    x3 = math.sqrt((1 + 20 * t * t) / 10)
    x2 = math.sqrt(1 - t * t - x3 * x3)
    return np.array([t, x2, x3]) if branch == "I" else np.array([t, -x2, x3])


def random_sym(rng, n, scale=1.0):
    M = rng.standard_normal((n, n)) * scale
    return 0.5 * (M + M.T)


def load_fixture(name):
    return json.loads((FIXTURES / name).read_text())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS, key=int):
        ok, detail = mod.RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {key}: {detail}")
