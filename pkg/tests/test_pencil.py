import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hqcqp.pencil import (
    as_sym,
    congruence_diagonalize,
    find_definite_pencil2,
    find_definite_shift,
    inertia,
    lambda_min,
    nullspace_basis,
    orth_complement,
    sym_eig,
)

from conftest import random_sym


def test_as_sym_symmetrizes_and_rejects_bad_input():
    A = as_sym([[1, 2], [0, 1]])
    assert np.array_equal(A, A.T)
    with pytest.raises(ValueError):
        as_sym([[1, np.nan], [0, 1]])
    with pytest.raises(ValueError):
        as_sym(np.ones((2, 3)))


def test_sym_eig_examples(rng):
    assert np.allclose(sym_eig(np.eye(3)).values, 1.0)
    assert np.allclose(sym_eig(np.diag([3., 1, 2])).values, [1, 2, 3])
    for _ in range(20):
        M = random_sym(rng, 6)
        w, V = sym_eig(M)
        nrm = np.linalg.norm(M, 2)
        assert np.linalg.norm(V @ np.diag(w) @ V.T - M) <= 1e-10 * nrm
        assert np.linalg.norm(M @ V - V * w) <= 1e-10 * nrm
        assert np.linalg.norm(V.T @ V - np.eye(6)) <= 1e-12
        assert np.all(np.diff(w) >= 0)


@pytest.mark.parametrize("M,expected", [
    (np.diag([-1., 0, 2]), (1, 1, 1)),
    (np.eye(4), (0, 0, 4)),
    (np.diag([-1e-12, 1.]), (0, 1, 1)),
])
def test_inertia_examples(M, expected):
    i = inertia(M, 1e-8)
    assert (i.n_neg, i.n_zero, i.n_pos) == expected
    assert i.n == M.shape[0]


def test_inertia_rejects_nonpositive_tol():
    with pytest.raises(ValueError):
        inertia(np.eye(2), 0.0)


def test_inertia_sylvester_law(rng):
    for _ in range(30):
        w = rng.choice([-1.0, 0.0, 1.0], size=5) * rng.uniform(0.5, 2.0, size=5)
        Q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        M = Q @ np.diag(w) @ Q.T
        U, _, Vt = np.linalg.svd(rng.standard_normal((5, 5)))
        P = U @ np.diag(np.geomspace(1, 30, 5)) @ Vt  # cond <= 1e3
        a, b = inertia(M, 1e-8), inertia(P.T @ M @ P, 1e-8)
        assert (a.n_neg, a.n_zero, a.n_pos) == (b.n_neg, b.n_zero, b.n_pos)


def test_nullspace_basis_examples():
    N = nullspace_basis(np.diag([0., 1, 2]))
    assert N.shape == (3, 1) and abs(abs(N[0, 0]) - 1) < 1e-14
    assert nullspace_basis(np.eye(3)).shape == (3, 0)
    N = nullspace_basis(np.diag([0., 0, 5]))
    assert N.shape == (3, 2)
    assert np.allclose(N.T @ N, np.eye(2), atol=1e-12)


def test_orth_complement():
    W = orth_complement(np.array([[1., 0, 0], [0, 1, 0]]).T)
    assert W.shape == (3, 1) and abs(abs(W[2, 0]) - 1) < 1e-14


def test_find_definite_shift_examples():
    mu, cert = find_definite_shift(np.eye(2), np.zeros((2, 2)))
    assert cert.lambda_min_achieved == pytest.approx(1.0)
    mu, cert = find_definite_shift(np.diag([1., -1]), np.diag([0., 1]))
    assert mu > 1 and lambda_min(np.diag([1., mu - 1])) > 0
    assert math.isclose(cert.lambda_min_achieved, lambda_min(np.diag([1., -1 + mu])), abs_tol=1e-9)
    assert find_definite_shift(np.zeros((2, 2)), np.diag([1., -1])) is None
    with pytest.raises(ValueError):
        find_definite_shift(np.eye(2), np.eye(3))


def test_find_definite_shift_near_optimal(rng):
    for _ in range(20):
        A, B = random_sym(rng, 4), random_sym(rng, 4)
        grid = np.linspace(-50, 50, 20001)
        best = max(lambda_min(A + m * B) for m in grid)
        out = find_definite_shift(A, B)
        if out is None:
            assert best <= 1e-6
        else:
            mu, cert = out
            assert lambda_min(A + mu * B) > 0
            assert cert.lambda_min_achieved >= best - 1e-6


def test_find_definite_pencil2_examples():
    r = find_definite_pencil2(np.eye(3), np.diag([2, .5, 1]))
    assert r.found and math.isclose(math.hypot(*r.mu), 1.0)
    assert lambda_min(r.mu[0] * np.eye(3) + r.mu[1] * np.diag([2, .5, 1])) > 0
    # every combination is singular here, so no margin can be certified
    r = find_definite_pencil2(np.diag([1., -1]), np.diag([-1., 1]))
    assert not r.found and r.status == "unresolved"
    # three diagonal "directions" 120 degrees apart: lambda_min <= -1/2 everywhere
    c = math.sqrt(3) / 2
    r = find_definite_pencil2(np.diag([1., -.5, -.5]), np.diag([0., c, -c]))
    assert r.status == "none" and r.best_lambda_min == pytest.approx(-0.5, abs=1e-6)
    r = find_definite_pencil2(np.eye(3), np.diag([-20., 0, 10]))
    assert r.found
    assert abs(r.certificate.lambda_min_achieved
               - lambda_min(r.mu[0] * np.eye(3) + r.mu[1] * np.diag([-20., 0, 10]))) <= 1e-9


def test_find_definite_pencil2_narrow_arc_unresolved():
    # the valid arc of this pair is narrower than the grid spacing
    eps = 1e-4
    A1 = np.diag([1., -1 + eps])
    A2 = np.diag([-1., 1])
    r = find_definite_pencil2(A1, A2, K=8)
    assert r.status in ("found", "unresolved")


def test_congruence_diagonalize(rng):
    P, d1, d2 = congruence_diagonalize(np.eye(3), np.diag([1., 2, 3]), (1.0, 0.0))
    assert np.allclose(np.abs(P), np.eye(3)) and np.allclose(np.sort(d2), [1, 2, 3])
    P, d1, d2 = congruence_diagonalize(np.array([[4.]]), np.array([[1.]]), (1.0, 0.0))
    assert np.allclose(np.abs(P), 0.5) and np.allclose(d2, 0.25)
    for _ in range(20):
        X = rng.standard_normal((4, 4))
        A1 = X @ X.T + 0.5 * np.eye(4)
        A2 = random_sym(rng, 4)
        mu = (0.8, 0.6) if lambda_min(0.8 * A1 + 0.6 * A2) > 0 else (1.0, 0.0)
        P, d1, d2 = congruence_diagonalize(A1, A2, mu)
        M = mu[0] * A1 + mu[1] * A2
        assert np.allclose(P.T @ M @ P, np.eye(4), atol=1e-8)
        assert np.allclose(P.T @ A2 @ P, np.diag(d2), atol=1e-8)
        assert np.allclose(P.T @ A1 @ P, np.diag(d1), atol=1e-8)
        assert np.allclose(mu[0] * d1 + mu[1] * d2, 1.0)
    with pytest.raises(ValueError):
        congruence_diagonalize(np.diag([1., -1]), np.eye(2), (1.0, 0.0))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=3, max_size=6), st.integers(0, 2**31 - 1))
def test_inertia_property(diag, seed):
    # rotation preserves inertia; near-zero entries count as zero
    w = np.array(diag)
    Q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((w.size, w.size)))
    i = inertia(Q @ np.diag(w) @ Q.T, 1e-6)
    thr = 1e-6 * max(1.0, np.abs(w).max())
    if np.all((np.abs(w) > 10 * thr) | (w == 0)):
        assert (i.n_neg, i.n_zero, i.n_pos) == (
            int(np.sum(w < 0)), int(np.sum(w == 0)), int(np.sum(w > 0)))
    assert i.n_neg + i.n_zero + i.n_pos == w.size
