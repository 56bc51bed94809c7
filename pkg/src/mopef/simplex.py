"""Dense phase-1 simplex feasibility for tiny equality-form systems.

Decides whether {x >= 0 : A x = b} is non-empty and returns a feasible
point when it is.  Bland's rule is used throughout, so the method cannot
cycle.  Problem sizes here are desk scale (a few rows, a few thousand
columns at most), so a dense tableau is the simplest reliable choice.
"""

from __future__ import annotations

import numpy as np


def feasible_point(A: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> np.ndarray | None:
    """Return some x >= 0 with A x = b (within ``tol``), or None.

    Phase-1: minimize the sum of artificial variables starting from the
    all-artificial basis; the system is feasible iff the optimum is ~0.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape

    # flip rows so the right-hand side is nonnegative
    flip = b < 0
    A = np.where(flip[:, None], -A, A)
    b = np.where(flip, -b, b)

    # tableau [A | I | b]; objective row = reduced costs of sum(artificials)
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :] = -T[:m, :].sum(axis=0)
    T[m, n:n + m] = 0.0
    basis = list(range(n, n + m))

    while True:
        costs = T[m, :n + m]
        entering = np.flatnonzero(costs < -tol)
        if entering.size == 0:
            break
        j = int(entering[0])  # Bland: smallest eligible index
        col = T[:m, j]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            # phase-1 objective is bounded below by 0, so this cannot
            # happen with consistent arithmetic; treat as stalled
            break
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        candidates = rows[ratios <= best + tol]
        r = int(min(candidates, key=lambda k: basis[k]))  # Bland on leaving
        pivot = T[r, j]
        T[r, :] /= pivot
        for i in range(m + 1):
            if i != r and T[i, j] != 0.0:
                T[i, :] -= T[i, j] * T[r, :]
        basis[r] = j

    if -T[m, -1] > tol:  # positive artificial mass remains
        return None
    x = np.zeros(n)
    for r, j in enumerate(basis):
        if j < n:
            x[j] = max(T[r, -1], 0.0)
    if np.max(np.abs(A @ x - b)) > 10 * tol * (1 + np.abs(b).max(initial=0.0)):
        return None
    return x
