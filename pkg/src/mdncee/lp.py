"""Dense two-phase simplex for the small master-problem LPs.

The outer-approximation master relaxations have a few dozen rows and
columns, so a dense tableau is the simplest correct tool. Inequalities only
(Ax <= b) with finite variable boxes; upper bounds become rows after the
lower-bound shift. Pivoting uses Dantzig's rule with a deterministic switch
to Bland's rule to guarantee termination on degenerate instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LpResult", "solve_lp"]

FEAS_TOL = 1e-9
COST_TOL = 1e-9
PIVOT_TOL = 1e-11
BLAND_AFTER = 2000          # iterations of Dantzig pricing before Bland takes over
MAX_ITER = 20000


@dataclass
class LpResult:
    status: str               # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective: float | None


def _pivot(tableau: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factor = tableau[:, col].copy()
    factor[row] = 0.0
    tableau -= np.outer(factor, tableau[row])
    basis[row] = col


def _price(tableau: np.ndarray, ncols: int, iteration: int, allowed: np.ndarray) -> int:
    """Entering column index or -1 if optimal."""
    costs = tableau[-1, :ncols]
    if iteration < BLAND_AFTER:
        cand = np.where(allowed & (costs < -COST_TOL))[0]
        if len(cand) == 0:
            return -1
        return int(cand[np.argmin(costs[cand])])
    for j in range(ncols):
        if allowed[j] and costs[j] < -COST_TOL:
            return j
    return -1


def _ratio_row(tableau: np.ndarray, basis: np.ndarray, col: int, bland: bool) -> int:
    """Leaving row by minimum ratio; -1 if unbounded.

    Ties go to the lowest row index normally, or to the smallest basis index
    under Bland's rule (required for the anticycling guarantee).
    """
    m = len(basis)
    column = tableau[:m, col]
    rhs = tableau[:m, -1]
    best, best_ratio = -1, np.inf
    for i in range(m):
        if column[i] > PIVOT_TOL:
            ratio = rhs[i] / column[i]
            if ratio < best_ratio - 1e-12:
                best, best_ratio = i, ratio
            elif bland and ratio <= best_ratio + 1e-12 and best >= 0 and basis[i] < basis[best]:
                best = i
    return best


def _simplex(tableau: np.ndarray, basis: np.ndarray, ncols: int, forbidden=None) -> str:
    allowed = np.ones(ncols, dtype=bool)
    if forbidden is not None and len(forbidden):
        allowed[forbidden] = False
    for iteration in range(MAX_ITER):
        bland = iteration >= BLAND_AFTER
        col = _price(tableau, ncols, iteration, allowed)
        if col < 0:
            return "optimal"
        row = _ratio_row(tableau, basis, col, bland)
        if row < 0:
            return "unbounded"
        _pivot(tableau, basis, row, col)
    raise RuntimeError("simplex iteration limit exceeded (cycling?)")


def solve_lp(c, A, b, lb, ub) -> LpResult:
    """Minimize c.x subject to A x <= b and lb <= x <= ub (all finite boxes)."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    n = len(c)
    if A.size == 0:
        A = A.reshape(0, n)
    if np.any(ub < lb - 1e-15):
        return LpResult("infeasible", None, None)

    # shift to y = x - lb >= 0; upper bounds become rows
    b_shift = b - A @ lb
    span = ub - lb
    A2 = np.vstack([A, np.eye(n)])
    b2 = np.concatenate([b_shift, span])

    # row equilibration (scale-invariant reformulation, exact)
    scale = np.maximum(np.max(np.abs(A2), axis=1), 1e-300)
    A2 = A2 / scale[:, None]
    b2 = b2 / scale

    m = len(b2)
    # orient rows so rhs >= 0; slack signs record the orientation
    neg = b2 < 0
    A2[neg] *= -1.0
    b2[neg] *= -1.0
    slack_sign = np.where(neg, -1.0, 1.0)

    n_art = int(np.sum(neg))
    ncols = n + m + n_art
    tableau = np.zeros((m + 1, ncols + 1))
    tableau[:m, :n] = A2
    tableau[:m, n:n + m] = np.diag(slack_sign)
    art_cols = []
    k = 0
    for i in range(m):
        if neg[i]:
            tableau[i, n + m + k] = 1.0
            art_cols.append(n + m + k)
            k += 1
    tableau[:m, -1] = b2

    basis = np.empty(m, dtype=int)
    k = 0
    for i in range(m):
        if neg[i]:
            basis[i] = n + m + k
            k += 1
        else:
            basis[i] = n + i

    if n_art:
        # phase 1: minimize sum of artificials
        tableau[-1, :] = 0.0
        tableau[-1, art_cols] = 1.0
        for i in range(m):
            if basis[i] in art_cols:
                tableau[-1] -= tableau[i]
        status = _simplex(tableau, basis, ncols)
        if status != "optimal" or tableau[-1, -1] < -FEAS_TOL * max(1.0, float(np.max(np.abs(b2)))):
            return LpResult("infeasible", None, None)
        # drive zero-level artificials out of the basis; rows that resist are
        # redundant constraints and are dropped before phase 2
        art_set = set(art_cols)
        drop = []
        for i in range(m):
            if basis[i] in art_set:
                pivots = np.where(np.abs(tableau[i, :n + m]) > 1e-7)[0]
                if len(pivots):
                    _pivot(tableau, basis, i, int(pivots[0]))
                else:
                    drop.append(i)
        if drop:
            keep = [i for i in range(m) if i not in drop]
            tableau = np.vstack([tableau[keep], tableau[-1:]])
            basis = basis[keep]
            m = len(basis)

    # phase 2
    art = np.array(art_cols, dtype=int)
    tableau[-1, :] = 0.0
    tableau[-1, :n] = c
    for i in range(m):
        if tableau[-1, basis[i]] != 0.0:
            tableau[-1] -= tableau[-1, basis[i]] * tableau[i]
    status = _simplex(tableau, basis, ncols, forbidden=art if n_art else None)
    if status == "unbounded":
        return LpResult("unbounded", None, None)

    y = np.zeros(ncols)
    y[basis] = tableau[:m, -1]
    x = y[:n] + lb
    # snap round-off back into the box
    x = np.minimum(np.maximum(x, lb), ub)
    return LpResult("optimal", x, float(c @ x))
