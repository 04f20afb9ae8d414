import math

import numpy as np
import pytest

from hqcqp import oracle as orc
from hqcqp.oracle import (
    OracleInfeasibleError,
    available_kernels,
    fd_check,
    grid_steps,
    oracle_global,
    oracle_local_probe,
)
from hqcqp.qq2_global import Mode, QQ2Problem, solve_dual, solve_qq2
from hqcqp.qq2_local import find_local_nonglobal

from conftest import four_minima, flat_curve, random_sym

C1_POINT = np.array([math.sqrt(2), 2, 0]) / math.sqrt(6)
KERNELS = available_kernels()


def test_grid_steps_power_of_two():
    assert grid_steps(1e-3) == 4096
    assert grid_steps(math.pi / 8) == 8
    with pytest.raises(ValueError):
        grid_steps(0.0)


@pytest.mark.parametrize("kernel", KERNELS)
def test_identity_instance(kernel):
    r = oracle_global(QQ2Problem(np.eye(3), np.eye(3), np.eye(3)), resolution=1e-2, kernel=kernel)
    assert r.value == pytest.approx(1.0, abs=1e-12)
    assert r.n_feasible_samples > 0
    assert abs(np.linalg.norm(r.argmin_direction) - 1) <= 1e-12


def test_flat_curve_value():
    r = oracle_global(flat_curve(), resolution=1e-3)
    assert abs(r.value + 2 * math.sqrt(2) / 3) <= 1e-2


def test_four_minima_vs_solver():
    r = oracle_global(four_minima(), resolution=1e-3)
    assert abs(r.value - solve_qq2(four_minima()).value) <= 1e-2


def test_guards():
    with pytest.raises(ValueError):
        oracle_global(QQ2Problem(np.eye(5), np.eye(5), np.eye(5)))
    with pytest.raises(OracleInfeasibleError):
        oracle_global(QQ2Problem(np.eye(3), -np.eye(3), np.eye(3)), resolution=0.1)
    with pytest.raises(ValueError):
        oracle_global(flat_curve(), kernel="fortran")


@pytest.mark.skipif(len(KERNELS) < 2, reason="compiled kernel not built")
def test_kernels_agree(rng):
    for n in (3, 4):
        for mode in Mode:
            A0, A2 = random_sym(rng, n), random_sym(rng, n)
            P = QQ2Problem(A0, np.eye(n), A2 + np.eye(n), mode)
            res = 2e-2 if n == 3 else 1e-1
            a = oracle_global(P, resolution=res, kernel="cython")
            b = oracle_global(P, resolution=res, kernel="numpy")
            assert a.value == pytest.approx(b.value, abs=1e-13)
            assert a.n_feasible_samples == b.n_feasible_samples
            assert np.allclose(a.argmin_direction, b.argmin_direction, atol=1e-13)


def test_pure_python_env(monkeypatch):
    monkeypatch.setenv("HQCQP_PURE_PYTHON", "1")
    assert orc.default_kernel() == "numpy"


def test_monotone_refinement_inequality(rng):
    for _ in range(5):
        P = QQ2Problem(random_sym(rng, 3), np.eye(3), np.diag([0.5, *rng.uniform(0, 3, 2)]))
        vals = [oracle_global(P, resolution=math.pi / N).value for N in (16, 32, 64, 128, 256)]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_oracle_above_dual_when_compact(rng):
    for _ in range(10):
        X = rng.standard_normal((3, 3))
        P = QQ2Problem(random_sym(rng, 3), X @ X.T + 0.5 * np.eye(3), random_sym(rng, 3, 2))
        try:
            d = solve_dual(P)
        except Exception:
            continue
        assert oracle_global(P, resolution=1e-2).value >= d.value - 1e-6


def test_probe_examples():
    P = four_minima()
    for y, _ in find_local_nonglobal(P, n_starts=40).points:
        assert oracle_local_probe(P, y, radius=1e-2).is_local_min_at_resolution
    r = oracle_local_probe(flat_curve(), C1_POINT)
    assert r.is_local_min_at_resolution and r.best_violation <= 1e-9
    r = oracle_local_probe(flat_curve(), [0, 0, 1])
    assert not r.is_local_min_at_resolution and r.best_violation > 0
    assert r.n_accepted > 0
    with pytest.raises(ValueError):
        oracle_local_probe(flat_curve(), [0, 0, 2])


def test_fd_check(rng):
    for _ in range(3):
        P = QQ2Problem(random_sym(rng, 4), random_sym(rng, 4), random_sym(rng, 4))
        assert fd_check(P, rng.standard_normal(4)) <= 1e-6
    assert fd_check(flat_curve(), np.zeros(3)) <= 1e-12
