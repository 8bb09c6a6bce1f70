"""Convex-cell feasibility predicates: the only geometry the Euler engine needs.

Two-tier solving: a dense phase-1 simplex (Bland's rule) decides ball-free
queries; ball queries reduce to a minimum-norm projection. Decisions whose
margin falls below the degeneracy threshold come back DEGENERATE so Monte
Carlo callers can discard-and-resample the ambient draw.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .config import DEFAULT, Config
from .errors import InvalidAnchor, NumericalFailure
from .geometry import SimplicialCone

__all__ = [
    "ConvexCell",
    "Status",
    "FeasibilityVerdict",
    "polyhedron_nonempty",
    "min_norm_distance",
    "cone_cell_has_nonzero_point",
]


class Status(enum.Enum):
    NONEMPTY = "NONEMPTY"
    EMPTY = "EMPTY"
    DEGENERATE = "DEGENERATE"


@dataclass(frozen=True)
class ConvexCell:
    """Conjunction of linear inequalities <a, x> <= b, linear equalities
    <c, x> = d, and at most one centered ball constraint."""

    ineq_A: np.ndarray                     # (m, n)
    ineq_b: np.ndarray                     # (m,)
    eq_A: np.ndarray = None                # (p, n)
    eq_b: np.ndarray = None                # (p,)
    ball: tuple | None = None              # (center (n,), radius)

    def __post_init__(self):
        n = self.ineq_A.shape[1]
        if self.eq_A is None:
            object.__setattr__(self, "eq_A", np.zeros((0, n)))
            object.__setattr__(self, "eq_b", np.zeros(0))
        if self.ball is not None:
            c, r = self.ball
            if r < 0:
                raise ValueError("ball radius must be nonnegative")

    @property
    def ambient_dim(self) -> int:
        return self.ineq_A.shape[1]

    @staticmethod
    def from_rows(ineqs, eqs=(), ball=None, n=None) -> "ConvexCell":
        """Build from lists of (vector, rhs) pairs."""
        if n is None:
            probe = list(ineqs) + list(eqs)
            n = len(np.asarray(probe[0][0], dtype=float))
        iA = np.array([np.asarray(a, dtype=float) for a, _ in ineqs]).reshape(-1, n)
        ib = np.array([float(b) for _, b in ineqs])
        eA = np.array([np.asarray(c, dtype=float) for c, _ in eqs]).reshape(-1, n)
        eb = np.array([float(d) for _, d in eqs])
        return ConvexCell(iA, ib, eA, eb, ball)

    def stacked(self):
        """(A, b, n_ineq) with inequality rows first."""
        A = np.vstack([self.ineq_A, self.eq_A])
        b = np.concatenate([self.ineq_b, self.eq_b])
        return np.ascontiguousarray(A), np.ascontiguousarray(b), len(self.ineq_b)


@dataclass(frozen=True)
class FeasibilityVerdict:
    status: Status
    witness: np.ndarray | None = None
    distance: float | None = None


_STATUS_MAP = {K.EMPTY: Status.EMPTY, K.NONEMPTY: Status.NONEMPTY,
               K.DEGENERATE: Status.DEGENERATE}


def polyhedron_nonempty(cell: ConvexCell,
                        config: Config = DEFAULT) -> FeasibilityVerdict:
    """Phase-1 LP verdict for a ball-free cell."""
    if cell.ball is not None:
        raise ValueError("polyhedron_nonempty expects a cell without a ball")
    A, b, n_ineq = cell.stacked()
    st, x = K.phase1_feasible(A, b, n_ineq, config.tol_pivot, config.tol_feas,
                              config.tol_degenerate, config.witness_tol,
                              config.lp_iter_factor)
    if st == K.NUMFAIL:
        raise NumericalFailure("phase-1 simplex hit its iteration cap")
    witness = x if st == K.NONEMPTY else None
    return FeasibilityVerdict(_STATUS_MAP[st], witness)


def min_norm_distance(cell: ConvexCell, center, radius: float | None = None,
                      config: Config = DEFAULT) -> FeasibilityVerdict:
    """Distance from `center` to the (nonempty) polyhedral part of the cell.

    With `radius` given, classifies cell ∩ ball(center, radius):
    nonempty iff dist <= radius (1 - band), empty iff dist >= radius
    (1 + band), DEGENERATE in between.
    """
    if cell.ball is not None:
        raise ValueError("pass the ball radius separately")
    center = np.ascontiguousarray(center, dtype=float)
    A, b, n_ineq = cell.stacked()
    st, dist, x = K.min_norm_point(A, b, n_ineq, center,
                                   config.dykstra_max_sweeps,
                                   config.dykstra_tol, config.tol_degenerate,
                                   config.tol_feas)
    if st != K.NONEMPTY:
        raise NumericalFailure("minimum-norm projection did not converge")
    if radius is None:
        return FeasibilityVerdict(Status.NONEMPTY, x, dist)
    band = config.ball_band
    if dist <= radius * (1.0 - band):
        status = Status.NONEMPTY
    elif dist >= radius * (1.0 + band):
        status = Status.EMPTY
    else:
        status = Status.DEGENERATE
    return FeasibilityVerdict(status, x, dist)


def cone_cell_has_nonzero_point(cell: ConvexCell, anchor: SimplicialCone,
                                config: Config = DEFAULT):
    """True iff the cone cell (all rhs zero, cell ⊆ anchor) is not just {0}.

    Every nonzero point of the pointed anchor has strictly positive
    generator-coordinate sum, so the cell has a nonzero point iff
    cell ∧ {1.(G+ x) = 1} is feasible. Returns a bool, or a DEGENERATE
    verdict via Status for margin failures (caller decides policy).
    """
    if anchor.k == 0:
        raise InvalidAnchor("anchor cone has no generators")
    A = np.vstack([cell.ineq_A, cell.eq_A, anchor.anchor_row()[None, :]])
    b = np.concatenate([cell.ineq_b, cell.eq_b, [1.0]])
    n_ineq = cell.ineq_A.shape[0]
    st, _ = K.phase1_feasible(np.ascontiguousarray(A), b, n_ineq,
                              config.tol_pivot, config.tol_feas,
                              config.tol_degenerate, config.witness_tol,
                              config.lp_iter_factor)
    if st == K.NUMFAIL:
        raise NumericalFailure("phase-1 simplex hit its iteration cap")
    if st == K.DEGENERATE:
        return Status.DEGENERATE
    return st == K.NONEMPTY
