"""Numpy implementation of the oracle grid scan (fallback for the compiled kernel)."""

from __future__ import annotations

import numpy as np


def _directions(N: int, n: int, i: int):
    """All grid directions whose first polar index is ``i``, in scan order."""
    h = np.pi / N
    ct = np.cos(h * np.arange(N + 1))
    st = np.sin(h * np.arange(N + 1))
    cj, sj = ct[:N], st[:N]
    if n == 3:
        D = np.empty((N, 3))
        D[:, 0] = ct[i]
        D[:, 1] = st[i] * cj
        D[:, 2] = st[i] * sj
        return D
    # n == 4: rows ordered by (k, j)
    sk = st[:, None]
    D = np.empty((N + 1, N, 4))
    D[..., 0] = ct[i]
    D[..., 1] = st[i] * ct[:, None]
    D[..., 2] = st[i] * sk * cj[None, :]
    D[..., 3] = st[i] * sk * sj[None, :]
    return D.reshape(-1, 4)


def _quad(A, D):
    return np.einsum("ij,jk,ik->i", D, A, D)


def grid_scan(A0, A1, A2, N: int, equality: bool, feas_tol: float, band: float):
    A0, A1, A2 = (np.asarray(M, dtype=float) for M in (A0, A1, A2))
    n = A0.shape[0]
    if n not in (3, 4):
        raise ValueError("grid_scan supports n = 3 or 4")
    best, best_d, count = np.inf, None, 0
    for i in range(N + 1):
        D = _directions(N, n, i)
        q1 = _quad(A1, D)
        ok = q1 > 1e-14
        if not ok.any():
            continue
        D, q1 = D[ok], q1[ok]
        q2 = _quad(A2, D) / q1
        feas = np.abs(q2 - 1.0) <= band if equality else q2 <= 1.0 + feas_tol
        if not feas.any():
            continue
        D, q1 = D[feas], q1[feas]
        count += len(D)
        q0 = _quad(A0, D) / q1
        k = int(np.argmin(q0))
        if q0[k] < best:
            best, best_d = float(q0[k]), D[k].copy()
    return best, best_d, count
