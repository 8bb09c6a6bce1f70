"""Exact-rational phase-1 simplex, used as the test oracle for feasibility.

Fraction arithmetic end to end: the verdict NONEMPTY/EMPTY is exact for
rational-coefficient cells. Ball queries are irrational in general and are
out of scope here.
"""

from __future__ import annotations

from fractions import Fraction

__all__ = ["exact_nonempty"]


def exact_nonempty(A_rows, b_vals, n_ineq) -> bool:
    """Exact feasibility of {A_i x <= b_i (i < n_ineq), A_i x = b_i (rest)}.

    A_rows: list of coefficient lists (ints, Fractions, or exact floats);
    returns True iff the system has a solution.
    """
    A = [[Fraction(v) for v in row] for row in A_rows]
    b = [Fraction(v) for v in b_vals]
    M = len(A)
    if M == 0:
        return True
    n = len(A[0])

    rows = []
    m_ub = 0
    for i in range(M):
        if any(A[i]):
            rows.append(i)
            if i < n_ineq:
                m_ub += 1
        else:
            ok = (b[i] >= 0) if i < n_ineq else (b[i] == 0)
            if not ok:
                return False
    rows = sorted(rows, key=lambda i: (i >= n_ineq, i))
    m = len(rows)
    if m == 0:
        return True

    n_art = sum(1 for r, i in enumerate(rows)
                if r >= m_ub or b[i] < 0)
    ncols = 2 * n + m_ub + n_art + 1
    rhs = ncols - 1
    art0 = 2 * n + m_ub

    T = [[Fraction(0)] * ncols for _ in range(m)]
    basis = [0] * m
    ai = 0
    for r, i in enumerate(rows):
        sgn = 1 if b[i] >= 0 else -1
        for j in range(n):
            T[r][j] = sgn * A[i][j]
            T[r][n + j] = -sgn * A[i][j]
        T[r][rhs] = sgn * b[i]
        if r < m_ub:
            T[r][2 * n + r] = Fraction(sgn)
            if sgn > 0:
                basis[r] = 2 * n + r
                continue
        T[r][art0 + ai] = Fraction(1)
        basis[r] = art0 + ai
        ai += 1

    cost = [Fraction(0)] * ncols
    for j in range(n_art):
        cost[art0 + j] = Fraction(1)
    for r in range(m):
        if basis[r] >= art0:
            for j in range(ncols):
                cost[j] -= T[r][j]

    guard = 0
    while True:
        guard += 1
        if guard > 100000:
            raise RuntimeError("exact simplex failed to terminate")
        e = next((j for j in range(ncols - 1) if cost[j] < 0), None)
        if e is None:
            break
        lv, best, lv_basis = -1, None, None
        for r in range(m):
            if T[r][e] > 0:
                ratio = T[r][rhs] / T[r][e]
                if lv == -1 or ratio < best or (ratio == best
                                                and basis[r] < lv_basis):
                    lv, best, lv_basis = r, ratio, basis[r]
        if lv == -1:
            raise RuntimeError("phase-1 unbounded; should not happen")
        piv = T[lv][e]
        T[lv] = [v / piv for v in T[lv]]
        for r in range(m):
            if r != lv and T[r][e] != 0:
                f = T[r][e]
                T[r] = [v - f * w for v, w in zip(T[r], T[lv])]
        if cost[e] != 0:
            f = cost[e]
            cost = [v - f * w for v, w in zip(cost, T[lv])]
        basis[lv] = e

    w = sum(T[r][rhs] for r in range(m) if basis[r] >= art0)
    return w == 0
