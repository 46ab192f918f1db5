"""Dense revised simplex for ``max c·x  s.t.  A x <= b, 0 <= x <= u``.

Pricing is Dantzig (largest reduced cost, lowest index on ties) until the
iteration count reaches ``10 * (rows + cols)``, after which Bland's rule takes
over so degenerate cycling cannot continue. The ratio test breaks ties by the
lowest basic-variable index. Rows with negative right-hand side are handled by
a feasibility phase over artificial variables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-7
OPT_TOL = 1e-9
REFACTOR_EVERY = 50


class LpError(Exception):
    pass


class LpInfeasible(LpError):
    pass


class LpUnbounded(LpError):
    pass


@dataclass
class SimplexResult:
    x: np.ndarray
    objective: float
    iterations: int
    basis: tuple[int, ...]


def _iterate(A, b, c, basis, allowed, max_iter=None):
    """Run primal simplex from a feasible basis. Mutates ``basis`` in place."""
    m, n = A.shape
    bland_after = 10 * (m + n)
    Binv = np.linalg.inv(A[:, basis])
    it = 0
    since_refactor = 0
    while True:
        if since_refactor >= REFACTOR_EVERY:
            Binv = np.linalg.inv(A[:, basis])
            since_refactor = 0
        xB = Binv @ b
        pi = c[basis] @ Binv
        d = c - pi @ A
        d[basis] = 0.0
        d[~allowed] = 0.0
        if it < bland_after:
            j = int(np.argmax(d))
            if d[j] <= OPT_TOL:
                break
        else:
            cand = np.flatnonzero(d > OPT_TOL)
            if cand.size == 0:
                break
            j = int(cand[0])
        col = Binv @ A[:, j]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            raise LpUnbounded(f"column {j} improves the objective without bound")
        ratios = np.maximum(xB[rows], 0.0) / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12]
        r = int(min(tied, key=lambda i: basis[i]))
        # eta update of the basis inverse
        Binv[r] /= col[r]
        others = np.arange(m) != r
        Binv[others] -= np.outer(col[others], Binv[r])
        basis[r] = j
        it += 1
        since_refactor += 1
        if max_iter is not None and it >= max_iter:
            raise LpError("iteration limit reached")
    return it


def simplex_max(c, A, b, upper=None) -> SimplexResult:
    """Maximize ``c @ x`` subject to ``A @ x <= b``, ``0 <= x <= upper``.

    Finite entries of ``upper`` are appended as explicit rows.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A = np.asarray(A, dtype=float).reshape(-1, n)
    b = np.asarray(b, dtype=float).reshape(-1)
    if upper is not None:
        upper = np.asarray(upper, dtype=float)
        fin = np.flatnonzero(np.isfinite(upper))
        if fin.size:
            A = np.vstack([A, np.eye(n)[fin]])
            b = np.concatenate([b, upper[fin]])
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
        raise LpError("non-finite coefficient")
    m = A.shape[0]
    if m == 0:
        if np.any(c > OPT_TOL):
            raise LpUnbounded("no constraints and a positive objective coefficient")
        return SimplexResult(np.zeros(n), 0.0, 0, ())

    # equality form [A | I] x' = b with slacks; negative rows are flipped
    neg = b < 0
    sign = np.where(neg, -1.0, 1.0)
    Aeq = np.hstack([A * sign[:, None], np.diag(sign)])
    beq = b * sign
    n_art = int(neg.sum())
    total_iter = 0
    if n_art:
        art_rows = np.flatnonzero(neg)
        art = np.zeros((m, n_art))
        art[art_rows, np.arange(n_art)] = 1.0
        Aeq = np.hstack([Aeq, art])
        basis = [n + i if not neg[i] else -1 for i in range(m)]
        for a, i in enumerate(art_rows):
            basis[i] = n + m + a
        c1 = np.zeros(n + m + n_art)
        c1[n + m:] = -1.0
        allowed = np.ones(n + m + n_art, dtype=bool)
        total_iter += _iterate(Aeq, beq, c1, basis, allowed)
        Binv = np.linalg.inv(Aeq[:, basis])
        xB = Binv @ beq
        infeas = sum(xB[i] for i in range(m) if basis[i] >= n + m)
        if infeas > FEAS_TOL:
            raise LpInfeasible(f"phase-one residual {infeas:.3g}")
        # drive zero-level artificials out of the basis, dropping redundant rows
        keep = list(range(m))
        for r in range(m):
            if basis[r] < n + m:
                continue
            row = (Binv[r] @ Aeq)[: n + m]
            row[[v for v in basis if v < n + m]] = 0.0
            cand = np.flatnonzero(np.abs(row) > 1e-9)
            if cand.size:
                basis[r] = int(cand[0])
                Binv = np.linalg.inv(Aeq[:, basis])
            else:
                keep.remove(r)
        Aeq = Aeq[keep, : n + m]
        beq = beq[keep]
        basis = [basis[r] for r in keep]
    else:
        basis = list(range(n, n + m))

    c2 = np.concatenate([c, np.zeros(n + m)])[: Aeq.shape[1]]
    allowed = np.ones(Aeq.shape[1], dtype=bool)
    total_iter += _iterate(Aeq, beq, c2, basis, allowed)
    xB = np.linalg.solve(Aeq[:, basis], beq)
    full = np.zeros(Aeq.shape[1])
    full[basis] = xB
    x = full[:n]
    x[np.abs(x) < 1e-12] = 0.0
    x = np.maximum(x, 0.0)
    return SimplexResult(x=x, objective=float(c @ x), iterations=total_iter, basis=tuple(basis))
