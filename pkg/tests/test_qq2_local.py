import math

import numpy as np
import pytest

from hqcqp.qq2_global import Mode, QQ2Problem, solve_qq2
from hqcqp.qq2_local import (
    LOCAL_NON_GLOBAL,
    FinderConfig,
    InteriorPointError,
    Verdict,
    classify_point,
    compute_kkt,
    find_local_nonglobal,
    find_nonstrict_direction,
)

from conftest import four_minima, four_minima_point, flat_curve

C1_POINT = np.array([math.sqrt(2), 2, 0]) / math.sqrt(6)


@pytest.fixture(scope="module")
def four_minima_found():
    return find_local_nonglobal(four_minima(), n_starts=200, seed=0)


def test_kkt_examples():
    P = four_minima()
    x = four_minima_point("I", -0.0664)
    k = compute_kkt(P, x / math.sqrt(x @ x), tol=1e-3)
    assert k.licq_ok
    assert k.W.shape == (3, 1)
    assert np.allclose(k.W.T @ k.W, np.eye(1), atol=1e-12)

    k = compute_kkt(QQ2Problem(np.diag([1., 2, 3]), np.eye(3), np.eye(3)), [1, 0, 0])
    assert not k.licq_ok

    P = QQ2Problem(np.eye(3), np.eye(3), np.diag([0.5, 2, 2]))
    with pytest.raises(InteriorPointError):
        compute_kkt(P, [1, 0, 0])
    with pytest.raises(ValueError):
        compute_kkt(P, [2, 0, 0])


def test_kkt_multipliers_are_least_squares(rng):
    P = four_minima()
    for _ in range(10):
        x = four_minima_point("I", rng.uniform(-0.2, 0.2))
        k = compute_kkt(P, x)
        J = np.column_stack([P.A1 @ x, P.A2 @ x])
        ab = np.linalg.lstsq(J, -P.A0 @ x, rcond=None)[0]
        assert np.allclose([k.alpha, k.beta], ab)
        assert np.allclose(k.W.T @ J, 0, atol=1e-12)


def test_classify_flat_curve():
    P = flat_curve()
    c = classify_point(P, C1_POINT)
    assert c.verdict is Verdict.NON_STRICT_CANDIDATE
    assert all(abs(v) <= 1e-8 for v in c.nonstrict.residuals.values())
    v = c.nonstrict.v_bar
    assert abs(v @ P.A1 @ C1_POINT) <= 1e-8 and abs(v @ P.A2 @ C1_POINT) <= 1e-8

    assert classify_point(P, [0, 0, 1]).verdict is Verdict.NOT_LOCAL_MINIMIZER
    x = np.array([1, -math.sqrt(2), 0]) / math.sqrt(3)
    assert classify_point(P, x).verdict is Verdict.GLOBAL_BOUNDARY
    assert classify_point(P, 2 * x).verdict is Verdict.INFEASIBLE


def test_classify_four_minima_points(four_minima_found):
    P = four_minima()
    for x, c in four_minima_found.points:
        assert c.verdict is Verdict.STRICT_LOCAL_NON_GLOBAL
        assert classify_point(P, x).verdict is Verdict.STRICT_LOCAL_NON_GLOBAL
        k = c.kkt
        assert find_nonstrict_direction(P, x, k) is None


def test_classify_interior_points():
    P = QQ2Problem(np.diag([1., 2, 3]), np.eye(3), np.diag([0.5, 2, 2]))
    assert classify_point(P, [1, 0, 0]).verdict is Verdict.INTERIOR_GLOBAL
    x = np.array([0.9, 0.3, 0.0])
    x /= np.linalg.norm(x)
    assert classify_point(P, x).verdict is Verdict.INTERIOR_NOT_LOCAL


def test_classify_licq_failure():
    P = QQ2Problem(np.diag([1., 2, 3]), np.eye(3), np.eye(3))
    assert classify_point(P, [1, 0, 0]).verdict is Verdict.LICQ_FAIL_GLOBAL
    assert classify_point(P, [0, 1, 0]).verdict is Verdict.NOT_LOCAL_MINIMIZER
    P = QQ2Problem(np.diag([1., 2, 3]), np.eye(3), np.eye(3), Mode.EQUALITY)
    c = classify_point(P, [0, 0, 1])
    assert c.verdict in (Verdict.NOT_LOCAL_MINIMIZER, Verdict.LICQ_FAIL_NOT_GLOBAL)


def test_inequality_negative_multiplier():
    # minimizing q2 itself: boundary points are KKT with beta = -1
    A2 = np.diag([.5, 2, 2])
    P = QQ2Problem(A2, np.eye(3), A2)
    x = np.array([math.sqrt(2 / 3), math.sqrt(1 / 3), 0])
    c = classify_point(P, x)
    assert c.verdict is Verdict.NOT_LOCAL_MINIMIZER
    assert c.kkt.beta == pytest.approx(-1.0)
    c = classify_point(QQ2Problem(A2, np.eye(3), A2, Mode.EQUALITY), x)
    assert c.orientation == -1 and c.oriented_beta == pytest.approx(1.0)


def test_finder_four_minima(four_minima_found):
    r = four_minima_found
    assert len(r.points) == 4
    firsts = sorted(round(abs(x[0]), 3) for x, _ in r.points)
    assert firsts == [0.066, 0.066, 0.339, 0.339]
    for x, c in r.points:
        _, q1, q2 = four_minima().q(x)
        assert abs(q1 - 1) <= 1e-8 and abs(q2 - 1) <= 1e-8
        assert c.oriented_beta > 1e-8
        assert c.inertia.n_neg == 1
        assert c.kkt.gram_lambda_min > 1e-10
        assert c.value > r.global_value + 1e-8


def test_finder_flat_curve():
    r = find_local_nonglobal(flat_curve(), n_starts=40, seed=1)
    assert r.points
    for x, c in r.points:
        assert c.verdict is Verdict.NON_STRICT_CANDIDATE
        assert abs(x[0] - x[1] / math.sqrt(2)) <= 1e-6  # on C1
        assert abs(c.value) <= 1e-8


def test_finder_constant_objective_is_empty():
    P = QQ2Problem(np.eye(3), np.eye(3), np.diag([2., 0.5, 1]), Mode.EQUALITY)
    P = QQ2Problem(P.A2, P.A2, P.A2, Mode.EQUALITY)
    assert find_local_nonglobal(P, n_starts=10).points == []


def test_finder_seed_determinism_and_parallel():
    a = find_local_nonglobal(four_minima(), config=FinderConfig(n_starts=30, seed=7))
    b = find_local_nonglobal(four_minima(), config=FinderConfig(n_starts=30, seed=7, jobs=2))
    assert len(a.points) == len(b.points)
    for (x, _), (y, _) in zip(a.points, b.points):
        assert np.array_equal(x, y)


def test_finder_points_pass_structure_properties(rng):
    for _ in range(5):
        A0 = rng.standard_normal((3, 3))
        A0 = A0 + A0.T
        P = QQ2Problem(A0, np.eye(3), np.diag(rng.uniform(-3, 3, 3)), Mode.EQUALITY)
        try:
            r = find_local_nonglobal(P, n_starts=30, seed=0)
        except Exception:
            continue
        for x, c in r.points:
            assert c.verdict in LOCAL_NON_GLOBAL
            assert c.oriented_beta > 1e-8 and c.inertia.n_neg == 1
