"""Small dense two-phase simplex and the Chebyshev-center feasibility test.

Problems solved here are tiny (a handful of variables, a few dozen rows),
so a plain tableau with Bland's rule is fast enough and never cycles.
"""

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-11


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: np.ndarray | None
    value: float


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    piv = T[row]
    col_vals = T[:, col].copy()
    col_vals[row] = 0.0
    T -= np.outer(col_vals, piv)
    basis[row] = col


def _run(T, basis, ncols):
    """Maximize the objective stored in the last row of T (as -c)."""
    m = T.shape[0] - 1
    while True:
        obj = T[-1, :ncols]
        cand = np.nonzero(obj < -PIVOT_TOL)[0]
        if cand.size == 0:
            return "optimal"
        col = cand[0]  # Bland: smallest index
        colv = T[:m, col]
        pos = colv > PIVOT_TOL
        if not pos.any():
            return "unbounded"
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / colv[pos]
        best = ratios.min()
        ties = np.nonzero(ratios <= best + 1e-12 * max(1.0, abs(best)))[0]
        row = min(ties, key=lambda r: basis[r])
        _pivot(T, basis, row, col)


def maximize(c, A, b):
    """max c.y subject to A y <= b, y >= 0."""
    c = np.asarray(c, float)
    A = np.atleast_2d(np.asarray(A, float))
    b = np.asarray(b, float)
    m, nv = A.shape
    neg = b < 0
    nart = int(neg.sum())
    ncols = nv + m + nart
    T = np.zeros((m + 1, ncols + 1))
    T[:m, :nv] = A
    T[:m, nv:nv + m] = np.eye(m)
    T[:m, -1] = b
    T[:m][neg] *= -1.0
    basis = list(range(nv, nv + m))
    art_rows = np.nonzero(neg)[0]
    for k, r in enumerate(art_rows):
        T[r, nv + m + k] = 1.0
        basis[r] = nv + m + k
    if nart:
        # phase 1: maximize -sum(artificials)
        T[-1, nv + m:ncols] = 1.0
        for r in art_rows:
            T[-1] -= T[r]
        _run(T, basis, ncols)
        if T[-1, -1] < -1e-9 * max(1.0, np.abs(b).max()):
            return LPResult("infeasible", None, -np.inf)
        # drive remaining artificials out of the basis
        for r in range(m):
            if basis[r] >= nv + m:
                nz = np.nonzero(np.abs(T[r, :nv + m]) > PIVOT_TOL)[0]
                if nz.size:
                    _pivot(T, basis, r, nz[0])
        T = np.delete(T, np.s_[nv + m:ncols], axis=1)
        ncols = nv + m
        keep = [r for r in range(m) if basis[r] < ncols]
        T = np.vstack([T[keep], T[-1:]])
        basis = [basis[r] for r in keep]
        m = len(keep)
    T[-1] = 0.0
    T[-1, :nv] = -c
    for r in range(m):
        if basis[r] < nv and c[basis[r]] != 0.0:
            T[-1] += c[basis[r]] * T[r]
    status = _run(T, basis, ncols)
    if status != "optimal":
        return LPResult(status, None, np.inf)
    y = np.zeros(ncols)
    for r in range(m):
        y[basis[r]] = T[r, -1]
    return LPResult("optimal", y[:nv], float(c @ y[:nv]))


def maximize_free(c, A, b):
    """max c.x subject to A x <= b with x unrestricted in sign."""
    c = np.asarray(c, float)
    A = np.atleast_2d(np.asarray(A, float))
    res = maximize(np.concatenate([c, -c]), np.hstack([A, -A]), b)
    if res.status != "optimal":
        return res
    k = c.size
    x = res.x[:k] - res.x[k:]
    return LPResult("optimal", x, float(c @ x))


def chebyshev_center(A, b, rmax=1.0):
    """Largest ball inside {x : A x <= b}.

    Returns (center, radius); radius is -inf when the set is empty.
    Zero rows are treated as constant constraints.
    """
    A = np.atleast_2d(np.asarray(A, float))
    b = np.asarray(b, float)
    norms = np.linalg.norm(A, axis=1)
    const = norms < 1e-14
    if np.any(b[const] < -1e-9):
        return None, -np.inf
    A, b, norms = A[~const], b[~const], norms[~const]
    k = A.shape[1]
    M = np.hstack([A, norms[:, None]])
    cap = np.zeros((1, k + 1))
    cap[0, -1] = 1.0
    M = np.vstack([M, cap])
    rhs = np.concatenate([b, [rmax]])
    c = np.zeros(k + 1)
    c[-1] = 1.0
    # x free, r >= 0
    full = np.hstack([M[:, :k], -M[:, :k], M[:, k:]])
    res = maximize(np.concatenate([c[:k], -c[:k], [1.0]]), full, rhs)
    if res.status != "optimal":
        return None, -np.inf
    x = res.x[:k] - res.x[k:2 * k]
    return x, float(res.x[-1])
