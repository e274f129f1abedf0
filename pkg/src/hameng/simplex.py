"""Two-phase dense-tableau simplex with Bland's anti-cycling rule.

Solves ``min c.x`` subject to ``A x = b`` and ``lower <= x <= upper``.
Problems here are tiny (tens of rows, at most a few hundred columns), so a
dense tableau is simpler and plenty fast.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class UnboundedError(RuntimeError):
    pass


@dataclass
class SimplexResult:
    status: str  # "optimal" | "infeasible"
    x: np.ndarray | None
    objective: float
    iterations: int


def _pivot(tab: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    for r in range(tab.shape[0]):
        if r != row and tab[r, col] != 0.0:
            tab[r] -= tab[r, col] * tab[row]


def _run(tab: np.ndarray, basis: list[int], n_cols: int, tol: float, max_iter: int) -> int:
    """Iterate on ``tab`` (last row = reduced costs, last column = rhs)."""
    m = len(basis)
    for it in range(max_iter):
        costs = tab[-1, :n_cols]
        candidates = np.nonzero(costs < -tol)[0]
        if candidates.size == 0:
            return it
        col = int(candidates[0])
        column = tab[:m, col]
        positive = column > tol
        if not np.any(positive):
            raise UnboundedError("linear program is unbounded")
        ratios = np.full(m, np.inf)
        ratios[positive] = tab[:m, -1][positive] / column[positive]
        best = ratios.min()
        ties = np.nonzero(ratios <= best + tol * max(1.0, abs(best)))[0]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(tab, row, col)
        basis[row] = col
    raise RuntimeError(f"simplex did not converge in {max_iter} iterations")


def solve(c, a_eq, b_eq, lower=None, upper=None, tol: float = 1e-10, max_iter: int = 10_000) -> SimplexResult:
    c = np.asarray(c, dtype=float)
    a = np.atleast_2d(np.asarray(a_eq, dtype=float))
    b = np.asarray(b_eq, dtype=float).reshape(-1)
    n = c.size
    if a.shape != (b.size, n):
        raise ValueError(f"constraint shape {a.shape} inconsistent with {n} variables and {b.size} rows")
    lower = np.zeros(n) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    if np.any(~np.isfinite(lower)):
        raise ValueError("lower bounds must be finite")
    if np.any(upper < lower):
        return SimplexResult("infeasible", None, np.nan, 0)

    # shift to x' = x - lower >= 0, then add x' + s = upper - lower rows
    b = b - a @ lower
    bounded = np.nonzero(np.isfinite(upper))[0]
    n_slack = bounded.size
    rows = [np.hstack([a, np.zeros((a.shape[0], n_slack))])]
    rhs = [b]
    if n_slack:
        ub = np.zeros((n_slack, n + n_slack))
        ub[np.arange(n_slack), bounded] = 1.0
        ub[np.arange(n_slack), n + np.arange(n_slack)] = 1.0
        rows.append(ub)
        rhs.append(upper[bounded] - lower[bounded])
    big_a = np.vstack(rows)
    big_b = np.concatenate(rhs)
    flip = big_b < 0
    big_a[flip] *= -1
    big_b[flip] *= -1
    m, n_struct = big_a.shape

    # phase 1: artificial basis
    tab = np.zeros((m + 1, n_struct + m + 1))
    tab[:m, :n_struct] = big_a
    tab[:m, n_struct : n_struct + m] = np.eye(m)
    tab[:m, -1] = big_b
    tab[-1, :n_struct] = -big_a.sum(axis=0)
    tab[-1, -1] = -big_b.sum()
    basis = list(range(n_struct, n_struct + m))
    iters = _run(tab, basis, n_struct + m, tol, max_iter)
    scale = max(1.0, float(np.max(np.abs(big_b), initial=0.0)))
    if -tab[-1, -1] > 1e3 * tol * scale:
        return SimplexResult("infeasible", None, np.nan, iters)

    # drive leftover artificials out of the basis; drop redundant rows
    keep = []
    for r in range(m):
        if basis[r] >= n_struct:
            nonzero = np.nonzero(np.abs(tab[r, :n_struct]) > 1e-9)[0]
            if nonzero.size:
                _pivot(tab, r, int(nonzero[0]))
                basis[r] = int(nonzero[0])
                keep.append(r)
        else:
            keep.append(r)
    tab = np.vstack([tab[keep][:, list(range(n_struct)) + [tab.shape[1] - 1]], np.zeros((1, n_struct + 1))])
    basis = [basis[r] for r in keep]

    # phase 2
    cost = np.concatenate([c, np.zeros(n_slack)])
    tab[-1, :n_struct] = cost
    tab[-1, -1] = 0.0
    for r, j in enumerate(basis):
        tab[-1] -= cost[j] * tab[r]
    iters += _run(tab, basis, n_struct, tol, max_iter)

    xs = np.zeros(n_struct)
    for r, j in enumerate(basis):
        xs[j] = tab[r, -1]
    x = xs[:n] + lower
    return SimplexResult("optimal", x, float(c @ x), iters)
