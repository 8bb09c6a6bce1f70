"""Independent oracle suites: the slow, simple reference paths.

Euler: pruned depth-first subset search against the full 2^m - 1 lattice.
Feasibility: float phase-1 simplex against exact Fraction arithmetic.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .config import DEFAULT, Config
from .errors import BudgetExceeded, DegenerateSample, Unstable
from .euler import CellUnionQuery, Mode, euler_of_union, full_lattice_euler
from .exact_lp import exact_nonempty
from .feasibility import ConvexCell, Status, polyhedron_nonempty
from .geometry import build_cone


def random_compact_query(rng: np.random.Generator, max_cells: int):
    """A random COMPACT_UNION query: cells of random halfspaces in a ball."""
    n = int(rng.integers(1, 4))
    m = int(rng.integers(1, max_cells + 1))
    cells = []
    for _ in range(m):
        rows = int(rng.integers(1, 4))
        A = rng.standard_normal((rows, n))
        b = rng.standard_normal(rows) * 0.6
        cells.append(ConvexCell(A, b, ball=(np.zeros(n), 1.0)))
    return CellUnionQuery(tuple(cells), Mode.COMPACT_UNION)


def random_link_query(rng: np.random.Generator, max_cells: int):
    """A random LINK query over simplicial cones with random generators."""
    n = int(rng.integers(2, 4))
    m = int(rng.integers(1, max_cells + 1))
    cells = []
    anchors = []
    for _ in range(m):
        k = int(rng.integers(1, n + 1))
        g = rng.standard_normal((k, n))
        cone = build_cone(g)
        cells.append(ConvexCell(-cone.pinv, np.zeros(k), cone.complement,
                                np.zeros(n - k)))
        anchors.append(cone)
    return CellUnionQuery(tuple(cells), Mode.LINK, tuple(anchors))


def euler_oracle_suite(n_queries: int, max_cells: int, seed: int,
                       config: Config = DEFAULT) -> dict:
    """Pruned DFS vs full-lattice agreement over randomized queries.

    Degenerate draws are resampled (fresh RNG pull), mirroring the Monte
    Carlo discard policy, and counted.
    """
    rng = np.random.default_rng(seed)
    agree = 0
    total = 0
    degenerate = 0
    budget_exceeded = False
    while total < n_queries:
        q = (random_compact_query(rng, max_cells) if rng.random() < 0.5
             else random_link_query(rng, max_cells))
        try:
            fast = euler_of_union(q, config)
            slow = full_lattice_euler(q, config)
        except DegenerateSample:
            degenerate += 1
            if degenerate > max(20, n_queries):
                raise
            continue
        except BudgetExceeded:
            budget_exceeded = True
            break
        total += 1
        if fast.value == slow.value:
            agree += 1
    return {"agree": agree, "total": total, "degenerate": degenerate,
            "budget_exceeded": budget_exceeded}


def random_rational_cell(rng: np.random.Generator, denom: int = 8):
    """Ball-free cell with small rational coefficients (exactly
    representable in binary floating point)."""
    n = int(rng.integers(1, 5))
    m_ub = int(rng.integers(1, 10))
    m_eq = int(rng.integers(0, 3))
    num = rng.integers(-denom, denom + 1, size=(m_ub + m_eq, n))
    A = num.astype(float) / denom
    bnum = rng.integers(-denom, denom + 1, size=m_ub + m_eq)
    b = bnum.astype(float) / (2 * denom)
    rows = [[Fraction(int(v), denom) for v in row] for row in num]
    brows = [Fraction(int(v), 2 * denom) for v in bnum]
    cell = ConvexCell(A[:m_ub], b[:m_ub], A[m_ub:], b[m_ub:])
    return cell, rows, brows, m_ub


def feasibility_oracle_suite(n_instances: int, seed: int,
                             config: Config = DEFAULT) -> dict:
    """Numeric vs exact-rational phase-1 verdicts on random rational cells."""
    rng = np.random.default_rng(seed)
    agree = 0
    decided = 0
    degenerate = 0
    mismatches = []
    for i in range(n_instances):
        cell, rows, brows, m_ub = random_rational_cell(rng)
        verdict = polyhedron_nonempty(cell, config)
        exact = exact_nonempty(rows, brows, m_ub)
        if verdict.status is Status.DEGENERATE:
            degenerate += 1
            continue
        decided += 1
        numeric = verdict.status is Status.NONEMPTY
        if numeric == exact:
            agree += 1
        else:
            mismatches.append(i)
    return {"agree": agree, "decided": decided, "degenerate": degenerate,
            "total": n_instances, "mismatches": mismatches}
