"""Symmetric linear-algebra substrate.

Eigendecompositions, inertia counts, null spaces, searches for positive
definite members of one- and two-parameter matrix pencils, and simultaneous
congruence diagonalization of a definite pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import linalg

#: default relative zero/rank threshold
DEFAULT_TOL = 1e-8
GOLDEN_ITERS = 200
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def as_sym(M, name: str = "matrix") -> np.ndarray:
    """Return ``(M + M.T) / 2`` as a float array after validating shape and finiteness."""
    A = np.array(M, dtype=float)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return 0.5 * (A + A.T)


def mat_norm(M: np.ndarray) -> float:
    """Spectral norm (0 for empty matrices)."""
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def zero_threshold(M: np.ndarray, tol: float = DEFAULT_TOL) -> float:
    return tol * max(1.0, mat_norm(M))


class EigDecomp(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class Inertia:
    n_neg: int
    n_zero: int
    n_pos: int
    tol: float

    @property
    def n(self) -> int:
        return self.n_neg + self.n_zero + self.n_pos


@dataclass(frozen=True)
class PencilCertificate:
    mu: tuple[float, ...]
    lambda_min_achieved: float


def sym_eig(M) -> EigDecomp:
    """Ascending eigenvalues with orthonormal eigenvectors as columns."""
    A = as_sym(M)
    w, V = np.linalg.eigh(A)
    # eigh already sorts ascending; stable sort keeps the solver's order on ties
    order = np.argsort(w, kind="stable")
    return EigDecomp(w[order], V[:, order])


def lambda_min(M: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(M)[0])


def min_eigpair(M: np.ndarray) -> tuple[float, np.ndarray]:
    w, V = np.linalg.eigh(M)
    return float(w[0]), V[:, 0]


def inertia(M, tol: float = DEFAULT_TOL) -> Inertia:
    """Count negative, zero and positive eigenvalues.

    An eigenvalue counts as zero when ``|lambda| <= tol * max(1, ||M||)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = as_sym(M)
    w = np.linalg.eigvalsh(A)
    thr = zero_threshold(A, tol)
    n_neg = int(np.sum(w < -thr))
    n_pos = int(np.sum(w > thr))
    return Inertia(n_neg, len(w) - n_neg - n_pos, n_pos, tol)


def nullspace_basis(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (n x d) of the eigenspace with ``|lambda| <= tol * max(1, ||M||)``."""
    A = as_sym(M)
    w, V = np.linalg.eigh(A)
    mask = np.abs(w) <= zero_threshold(A, tol)
    return V[:, mask]


def orth_complement(X: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``range(X)``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 1 and X.shape[1] > 1:
        X = X.T
    n = X.shape[0]
    if X.size == 0:
        return np.eye(n)
    U, s, _ = np.linalg.svd(X, full_matrices=True)
    rank = int(np.sum(s > 1e-12 * max(1.0, s[0])))
    return U[:, rank:]


def _golden_max(f, lo: float, hi: float, iters: int = GOLDEN_ITERS):
    """Maximize a unimodal function on [lo, hi]; returns (argmax, max)."""
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if hi - lo <= 1e-15 * max(1.0, abs(lo), abs(hi)):
            break
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = f(d)
    best = max((fc, c), (fd, d), (f(lo), lo), (f(hi), hi))
    return best[1], best[0]


def maximize_lambda_min_shift(A: np.ndarray, B: np.ndarray, limit: float = 1e8):
    """Maximize the concave function ``mu -> lambda_min(A + mu B)``.

    Returns ``(mu, value, unbounded)``; ``unbounded`` is True when the value
    keeps increasing up to ``|mu| = limit``.
    """

    def f(mu):
        return lambda_min(A + mu * B)

    if mat_norm(B) == 0.0:
        return 0.0, f(0.0), False
    f0 = f(0.0)
    step = 1.0
    fp, fm = f(step), f(-step)
    if fp >= f0 and fp > fm:
        direction = 1.0
    elif fm > f0:
        direction = -1.0
    else:
        mu, val = _golden_max(f, -step, step)
        return mu, val, False
    # expand until the function stops increasing
    prev_mu, prev_f = 0.0, f0
    cur_mu, cur_f = direction * step, max(fp, fm)
    while True:
        nxt_mu = 2.0 * cur_mu
        if abs(nxt_mu) > limit:
            return cur_mu, cur_f, True
        nxt_f = f(nxt_mu)
        if nxt_f <= cur_f:
            lo, hi = sorted((prev_mu, nxt_mu))
            mu, val = _golden_max(f, lo, hi)
            return mu, val, False
        prev_mu, prev_f = cur_mu, cur_f
        cur_mu, cur_f = nxt_mu, nxt_f


def find_definite_shift(A, B, tol: float = DEFAULT_TOL):
    """Search for ``mu`` with ``A + mu B`` positive definite.

    Returns ``(mu, PencilCertificate)`` or ``None``. When ``lambda_min(A + mu B)``
    grows without bound, the first doubling step with a positive value is
    returned instead of the (non-existent) maximizer.
    """
    A = as_sym(A, "A")
    B = as_sym(B, "B")
    if A.shape != B.shape:
        raise ValueError("dimension mismatch")
    mu, val, unbounded = maximize_lambda_min_shift(A, B)
    if unbounded:
        for cand in (0.0, 1.0, -1.0):
            if lambda_min(A + cand * B) > 0:
                mu = cand
                break
        else:
            sign = 1.0 if mu > 0 else -1.0
            t = 1.0
            while lambda_min(A + sign * t * B) <= 0:
                t *= 2.0
            mu = sign * t
        val = lambda_min(A + mu * B)
    thr = tol * max(1.0, mat_norm(A), mat_norm(B))
    if val <= thr:
        return None
    return mu, PencilCertificate((float(mu),), float(val))


@dataclass(frozen=True)
class Pencil2Result:
    """Outcome of the two-parameter definite pencil search.

    ``status`` is ``"found"``, ``"none"`` (positivity excluded on the whole
    circle by a Lipschitz bound) or ``"unresolved"`` (nothing found at
    resolution ``K``, but nonexistence not proven).
    """

    status: str
    mu: tuple[float, float] | None
    certificate: PencilCertificate | None
    best_lambda_min: float
    resolution: int

    @property
    def found(self) -> bool:
        return self.status == "found"


def _exclude_positive(g, centers, vals, radius, L, thr, best, max_evals=20000):
    """Lipschitz cover of ``g`` by cells ``[c - r, c + r]``.

    Returns ``("none", best)`` when ``g <= -thr`` is certified everywhere,
    ``("found", (theta, value, r))`` when a cell centre beats ``thr``, and
    ``("unresolved", best)`` when the evaluation budget runs out.
    """
    cells = [(float(c), float(v)) for c, v in zip(centers, vals)]
    r = radius
    evals = 0
    while True:
        open_cells = [(c, v) for c, v in cells if v + L * r > -thr]
        if not open_cells:
            return "none", best
        if evals + 2 * len(open_cells) > max_evals:
            return "unresolved", best
        r /= 3.0
        cells = []
        for c, v in open_cells:
            cells.append((c, v))
            for t in (c - 2.0 * r, c + 2.0 * r):
                gv = g(t)
                evals += 1
                if gv > thr:
                    return "found", (t, gv, r)
                best = max(best, gv)
                cells.append((t, gv))


def find_definite_pencil2(
    A1,
    A2,
    K: int = 720,
    tol: float = DEFAULT_TOL,
    theta_range: tuple[float, float] = (0.0, 2.0 * math.pi),
) -> Pencil2Result:
    """Find a unit ``(mu1, mu2)`` with ``mu1 A1 + mu2 A2`` positive definite.

    Scans ``K`` equally spaced angles of ``theta_range`` and golden-section
    refines around the best one. ``theta -> lambda_min(cos A1 + sin A2)`` is
    Lipschitz with constant ``L = sqrt(|A1|^2 + |A2|^2)``; "none" is reported
    only once every cell of the grid is covered by ``value + L * radius <= -thr``,
    splitting uncertain cells as needed (see :func:`_exclude_positive`).
    """
    A1 = as_sym(A1, "A1")
    A2 = as_sym(A2, "A2")
    if A1.shape != A2.shape:
        raise ValueError("dimension mismatch")

    def g(theta):
        return lambda_min(math.cos(theta) * A1 + math.sin(theta) * A2)

    lo, hi = theta_range
    full = abs((hi - lo) - 2.0 * math.pi) < 1e-12
    npts = K if full else K + 1
    h = (hi - lo) / K
    thetas = lo + h * np.arange(npts)
    vals = np.array([g(t) for t in thetas])
    k = int(np.argmax(vals))
    a = thetas[k] - h if (full or k > 0) else thetas[k]
    b = thetas[k] + h if (full or k < npts - 1) else thetas[k]
    theta, best = _golden_max(g, a, b)
    if vals[k] > best:
        theta, best = float(thetas[k]), float(vals[k])
    thr = tol * max(1.0, mat_norm(A1), mat_norm(A2))
    if best > thr:
        mu = (math.cos(theta), math.sin(theta))
        cert = PencilCertificate(mu, lambda_min(mu[0] * A1 + mu[1] * A2))
        return Pencil2Result("found", mu, cert, best, K)
    L = math.hypot(mat_norm(A1), mat_norm(A2))
    status, best = _exclude_positive(g, thetas, vals, h / 2.0, L, thr, best)
    if status == "found":
        theta, _ = _golden_max(g, best[0] - best[2], best[0] + best[2])
        mu = (math.cos(theta), math.sin(theta))
        if lambda_min(mu[0] * A1 + mu[1] * A2) <= best[1]:
            mu = (math.cos(best[0]), math.sin(best[0]))
        cert = PencilCertificate(mu, lambda_min(mu[0] * A1 + mu[1] * A2))
        return Pencil2Result("found", mu, cert, cert.lambda_min_achieved, K)
    return Pencil2Result(status, None, None, best, K)


def congruence_diagonalize(A1, A2, mu, tol: float = DEFAULT_TOL):
    """Simultaneously diagonalize a definite pair by congruence.

    Given ``M = mu1 A1 + mu2 A2`` positive definite, returns ``(P, d1, d2)``
    with ``P.T @ M @ P = I``, ``P.T @ A1 @ P = diag(d1)`` and
    ``P.T @ A2 @ P = diag(d2)``; ``mu1 * d1 + mu2 * d2 == 1`` componentwise.
    """
    A1 = as_sym(A1, "A1")
    A2 = as_sym(A2, "A2")
    mu1, mu2 = float(mu[0]), float(mu[1])
    M = mu1 * A1 + mu2 * A2
    if lambda_min(M) <= zero_threshold(M, tol):
        raise ValueError("pencil is not positive definite at mu")
    L = np.linalg.cholesky(M)
    # eigendecompose the pair member whose coefficient is smaller, derive the other
    use_a2 = abs(mu1) >= abs(mu2)
    C = A2 if use_a2 else A1
    Y = linalg.solve_triangular(L, C, lower=True)
    S = linalg.solve_triangular(L, Y.T, lower=True)
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    P = linalg.solve_triangular(L.T, V, lower=False)
    if use_a2:
        d2 = w
        d1 = (1.0 - mu2 * d2) / mu1
    else:
        d1 = w
        d2 = (1.0 - mu1 * d1) / mu2
    return P, d1, d2
