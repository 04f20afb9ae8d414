import math

import numpy as np
import pytest

from hqcqp.oracle import oracle_global
from hqcqp.pencil import lambda_min
from hqcqp.qq2_global import (
    Compactness,
    Mode,
    QQ2Problem,
    QQ2Status,
    RecoveryError,
    check_assumptions,
    check_compactness,
    recover_primal,
    solve_dual,
    solve_qq2,
    verify_global_certificate,
)

from conftest import four_minima, flat_curve, random_sym

FLAT_CURVE_VALUE = -2 * math.sqrt(2) / 3


def test_problem_validation():
    with pytest.raises(ValueError):
        QQ2Problem(np.eye(2), np.eye(2), np.eye(2))
    with pytest.raises(ValueError):
        QQ2Problem(np.eye(3), np.eye(3), np.eye(4))
    assert QQ2Problem(np.eye(3), np.eye(3), np.eye(3), "equality").mode is Mode.EQUALITY


def test_assumptions_four_minima():
    P = four_minima()
    r = check_assumptions(P)
    assert r.c1_holds and r.c2 is not None and r.c3 is not None
    for w, cmp in ((r.c2, lambda v: v < 1), (r.c3, lambda v: v > 1)):
        _, q1, q2 = P.q(w)
        assert abs(q1 - 1) <= 1e-9 and cmp(q2)
    assert r.a2_minus_a1_indefinite


def test_assumptions_trivial():
    r = check_assumptions(QQ2Problem(np.eye(3), np.eye(3), np.eye(3)))
    assert r.c2 is None and r.c3 is None
    A1 = np.diag([1., -1, 1])
    r = check_assumptions(QQ2Problem(np.eye(3), A1, -A1))
    assert not r.c1_holds and r.c1.status != "found"


def test_compactness_examples():
    A0 = np.eye(3)
    P = QQ2Problem(A0, np.eye(3), np.diag([3., -1, 2]), Mode.EQUALITY)
    assert check_compactness(P)[0] is Compactness.COMPACT_E
    kind, mu = check_compactness(QQ2Problem(A0, np.diag([1., -1, 0]), np.diag([0., 1, 1])))
    assert kind is Compactness.COMPACT_F and 0 < mu < 1
    kind, _ = check_compactness(QQ2Problem(A0, np.diag([1., -1, 1]), np.zeros((3, 3))))
    assert kind is Compactness.NOT_COMPACT
    kind, _ = check_compactness(QQ2Problem(A0, -np.eye(3), np.eye(3)))
    assert kind is Compactness.EMPTY


def test_dual_examples():
    P = QQ2Problem(np.eye(3), np.eye(3), np.eye(3))
    d = solve_dual(P)
    assert d.value == pytest.approx(1.0, abs=1e-9)
    assert d.beta >= 0 and d.alpha + d.beta == pytest.approx(-1.0, abs=1e-9)
    assert solve_dual(flat_curve()).value == pytest.approx(FLAT_CURVE_VALUE, abs=1e-8)


def test_dual_matches_oracle_four_minima():
    d = solve_dual(four_minima())
    o = oracle_global(four_minima(), resolution=2e-3)
    assert abs(d.value - o.value) <= max(1e-6, 2 * o.error_bound)


def test_recover_primal_examples():
    d = solve_dual(flat_curve())
    x = recover_primal(flat_curve(), d.alpha, d.beta)
    target = np.array([1, -math.sqrt(2), 0]) / math.sqrt(3)
    assert min(np.linalg.norm(x - target), np.linalg.norm(x + target)) <= 1e-6

    # d = 2: y1^2 + y2^2 = 1, 3 y1^2 - y2^2 = 1
    P = QQ2Problem(np.diag([0., 0, 1]), np.eye(3), np.diag([3., -1, 0]), Mode.EQUALITY)
    x = recover_primal(P, 0.0, 0.0)
    assert np.allclose(np.abs(x), [1 / math.sqrt(2), 1 / math.sqrt(2), 0], atol=1e-8)

    P = QQ2Problem(np.diag([0., 1, 1]), np.eye(3), np.diag([2., 1, 1]))
    with pytest.raises(RecoveryError) as exc:
        recover_primal(P, 0.0, 0.0)
    assert exc.value.stage == "recover_primal"


def test_verify_certificate_examples():
    P = flat_curve(Mode.INEQUALITY)
    s = solve_qq2(P)
    assert verify_global_certificate(P, s.x_star, s.certificate.alpha, s.certificate.beta).passed
    bad = verify_global_certificate(P, s.x_star, s.certificate.alpha, -0.1)
    assert not bad.passed and not bad.multiplier_sign
    bad = verify_global_certificate(P, 2 * s.x_star, s.certificate.alpha, s.certificate.beta)
    assert not bad.feasibility


def test_solve_examples():
    for mode in Mode:
        s = solve_qq2(flat_curve(mode))
        assert s.status is QQ2Status.GLOBAL and s.value == pytest.approx(FLAT_CURVE_VALUE, abs=1e-8)
    s = solve_qq2(QQ2Problem(np.eye(3), np.eye(3), np.eye(3)))
    assert s.value == pytest.approx(1.0, abs=1e-9)
    s = solve_qq2(four_minima())
    assert s.status is QQ2Status.GLOBAL
    assert abs(abs(s.x_star[0]) - 0.3611) <= 5e-4
    assert solve_qq2(QQ2Problem(np.eye(3), -np.eye(3), np.eye(3))).status is QQ2Status.INFEASIBLE
    A1 = np.diag([1., -1, 1])
    assert solve_qq2(QQ2Problem(np.eye(3), A1, -A1)).status is QQ2Status.ASSUMPTION_FAILURE


def _compact_instance(rng, n=3, mode=Mode.INEQUALITY):
    while True:
        A0 = random_sym(rng, n)
        X = rng.standard_normal((n, n))
        A1 = X @ X.T / n + 0.3 * np.eye(n)
        A2 = random_sym(rng, n, 2.0)
        P = QQ2Problem(A0, A1, A2, mode)
        r = check_assumptions(P)
        if r.holds_for(mode):
            return P


def test_certificate_and_strong_duality_random(rng):
    for mode in Mode:
        for _ in range(15):
            P = _compact_instance(rng, n=int(rng.integers(3, 6)), mode=mode)
            s = solve_qq2(P)
            assert s.status is QQ2Status.GLOBAL
            c = s.certificate
            assert s.check.passed
            _, _, q2 = P.q(s.x_star)
            assert abs(s.value - (-c.alpha - c.beta * q2)) <= 1e-6 * P.scale
            assert lambda_min(P.lagrangian_hessian(c.alpha, c.beta)) >= -1e-7 * P.scale


def test_weak_duality_trace(rng):
    for _ in range(10):
        P = _compact_instance(rng)
        o = oracle_global(P, resolution=1e-2)
        d = solve_dual(P)
        for a, b, v in d.trace:
            if lambda_min(P.lagrangian_hessian(a, b)) >= -1e-9 * P.scale and b >= 0:
                assert v <= o.value + 1e-9


def test_congruence_metamorphic(rng):
    for _ in range(10):
        P = _compact_instance(rng)
        Q = rng.standard_normal((3, 3)) + 2 * np.eye(3)
        a = solve_qq2(P)
        b = solve_qq2(P.transformed(Q))
        assert abs(a.value - b.value) <= 1e-7 * np.linalg.cond(Q) ** 2 * P.scale
        y = np.linalg.solve(Q, a.x_star)
        assert np.allclose(P.transformed(Q).q(y), P.q(a.x_star), atol=1e-9 * np.linalg.cond(Q) ** 2)
