"""Exact Euler characteristics of unions of convex cells via the valuation
identity.

chi(∪ A_i) = sum over nonempty intersections of (-1)^(|S|+1): every
intersection of compact convex cells contributes chi = 1, and in LINK mode
every intersection that is a pointed cone different from {0} has a
contractible spherical trace, so it also contributes 1. Depth-first subset
search, pruned at the first empty intersection.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .config import DEFAULT, Config
from .errors import (BudgetExceeded, DegenerateSample, DimensionMismatch,
                     InvalidAnchor, NumericalFailure, Unstable)
from .feasibility import ConvexCell
from .geometry import AffineFlat, ConicGerm, Rotation, PolytopeUnion

__all__ = [
    "Mode",
    "CellUnionQuery",
    "ChiResult",
    "euler_of_union",
    "full_lattice_euler",
    "chi_slice",
    "chi_link_section",
    "chi_link",
    "stabilized_chi_limit",
    "PackedCompact",
    "PackedLink",
    "pack_link_germ",
    "pack_link_pair",
    "pack_slice_pair",
    "pack_slice_flat",
    "pack_polytope_scene",
]


class Mode(enum.Enum):
    COMPACT_UNION = "COMPACT_UNION"
    LINK = "LINK"


@dataclass(frozen=True)
class ChiResult:
    value: int
    cells_probed: int
    degenerate: bool = False


@dataclass(frozen=True)
class CellUnionQuery:
    cells: tuple                 # ConvexCell
    mode: Mode
    anchors: tuple = ()          # SimplicialCone per cell, LINK mode only


def _tols(config: Config):
    return (config.tol_pivot, config.tol_feas, config.tol_degenerate,
            config.witness_tol, config.lp_iter_factor)


def _raise_for(status: int, probed: int = 0):
    if status == K.DEGENERATE:
        raise DegenerateSample("feasibility margin inside degeneracy band")
    if status == K.BUDGET:
        raise BudgetExceeded(f"subset budget exceeded after {probed} probes")
    if status == K.NUMFAIL:
        raise NumericalFailure("solver did not converge inside a chi query")
    if status == K.UNSTABLE:
        raise Unstable("delta ladder exhausted without stabilizing")


# ---------------------------------------------------------------------------
# packed cell formats

@dataclass
class PackedCompact:
    """Cells as shared row arrays; rhs templates scale linearly in delta."""
    n: int
    AU: np.ndarray
    bu: np.ndarray
    off_u: np.ndarray
    AE: np.ndarray
    be: np.ndarray
    off_e: np.ndarray
    base_AE: np.ndarray
    base_be: np.ndarray
    radius: float = 1.0


@dataclass
class PackedLink:
    """Homogeneous cone cells plus one anchor row per cell."""
    n: int
    AU: np.ndarray
    off_u: np.ndarray
    AE: np.ndarray
    off_e: np.ndarray
    anchors: np.ndarray


def _assemble(cell_rows, n):
    """cell_rows: list of (ineq_A, ineq_b, eq_A, eq_b); sorted by row count."""
    order = sorted(range(len(cell_rows)),
                   key=lambda i: cell_rows[i][0].shape[0] + cell_rows[i][2].shape[0])
    AU, bu, AE, be = [], [], [], []
    off_u = [0]
    off_e = [0]
    for i in order:
        iA, ib, eA, eb = cell_rows[i]
        AU.append(iA)
        bu.append(ib)
        AE.append(eA)
        be.append(eb)
        off_u.append(off_u[-1] + iA.shape[0])
        off_e.append(off_e[-1] + eA.shape[0])
    AU = np.vstack(AU) if AU else np.zeros((0, n))
    AE = np.vstack(AE) if AE else np.zeros((0, n))
    bu = np.concatenate(bu) if bu else np.zeros(0)
    be = np.concatenate(be) if be else np.zeros(0)
    return (np.ascontiguousarray(AU), np.ascontiguousarray(bu),
            np.array(off_u, dtype=np.int64), np.ascontiguousarray(AE),
            np.ascontiguousarray(be), np.array(off_e, dtype=np.int64), order)


def pack_link_germ(X: ConicGerm) -> PackedLink:
    """LINK cells of a germ: one pointed cone cell per cone with k >= 1.

    Cones with no generators are skipped; their link is empty.
    """
    n = X.ambient_dim
    rows = []
    anchors = []
    for c in X.cones:
        if c.k == 0:
            continue
        rows.append((-c.pinv, np.zeros(c.k), c.complement,
                     np.zeros(n - c.k)))
        anchors.append(c.anchor_row())
    AU, _, off_u, AE, _, off_e, order = _assemble(rows, n)
    anchors = (np.array([anchors[i] for i in order])
               if anchors else np.zeros((0, n)))
    return PackedLink(n, AU, off_u, AE, off_e, np.ascontiguousarray(anchors))


def pack_link_pair(X: ConicGerm, Y: ConicGerm, R: Rotation) -> PackedLink:
    """LINK cells of the intersection germ X ∩ R Y: one cell per cone pair."""
    if X.ambient_dim != Y.ambient_dim:
        raise DimensionMismatch("germ dimensions differ")
    n = X.ambient_dim
    M = R.matrix
    rows = []
    anchors = []
    for cx in X.cones:
        if cx.k == 0:
            continue
        ax = cx.anchor_row()
        for cy in Y.cones:
            if cy.k == 0:
                continue
            ineq_A = np.vstack([-cx.pinv, -(cy.pinv @ M.T)])
            eq_A = np.vstack([cx.complement, cy.complement @ M.T])
            rows.append((ineq_A, np.zeros(ineq_A.shape[0]), eq_A,
                         np.zeros(eq_A.shape[0])))
            anchors.append(ax)
    AU, _, off_u, AE, _, off_e, order = _assemble(rows, n)
    anchors = (np.array([anchors[i] for i in order])
               if anchors else np.zeros((0, n)))
    return PackedLink(n, AU, off_u, AE, off_e, np.ascontiguousarray(anchors))


def pack_slice_pair(X: ConicGerm, Y: ConicGerm, R: Rotation, v: np.ndarray,
                    radius: float = 1.0) -> PackedCompact:
    """Cells of X ∩ (R Y + delta v) ∩ ball(0, radius), rhs at delta = 1."""
    if X.ambient_dim != Y.ambient_dim:
        raise DimensionMismatch("germ dimensions differ")
    n = X.ambient_dim
    M = R.matrix
    rows = []
    for cx in X.cones:
        for cy in Y.cones:
            gy = cy.pinv @ M.T                     # (k_y, n)
            ey = cy.complement @ M.T               # (n-k_y, n)
            ineq_A = np.vstack([-cx.pinv, -gy])
            ineq_b = np.concatenate([np.zeros(cx.k), -(gy @ v)])
            eq_A = np.vstack([cx.complement, ey])
            eq_b = np.concatenate([np.zeros(n - cx.k), ey @ v])
            rows.append((ineq_A, ineq_b, eq_A, eq_b))
    AU, bu, off_u, AE, be, off_e, _ = _assemble(rows, n)
    return PackedCompact(n, AU, bu, off_u, AE, be, off_e,
                         np.zeros((0, n)), np.zeros(0), radius)


def pack_slice_flat(X: ConicGerm, flat_complement: np.ndarray, v: np.ndarray,
                    radius: float = 1.0) -> PackedCompact:
    """Cells of X ∩ (H + delta v) ∩ ball for a linear flat H.

    H enters purely through equality rows (its complement basis), one cell
    per cone of X; by additivity of the valuation this matches the
    orthant-cone expansion of H at lower cost.
    """
    n = X.ambient_dim
    rows = []
    base_b = flat_complement @ v
    for cx in X.cones:
        rows.append((-cx.pinv, np.zeros(cx.k), cx.complement,
                     np.zeros(n - cx.k)))
    AU, bu, off_u, AE, be, off_e, _ = _assemble(rows, n)
    return PackedCompact(n, AU, bu, off_u, AE, be, off_e,
                         np.ascontiguousarray(flat_complement),
                         np.ascontiguousarray(base_b), radius)


def pack_polytope_scene(X: ConicGerm, Y: PolytopeUnion, R: Rotation,
                        radius: float = 1.0) -> PackedCompact:
    """Cells of X ∩ R Y ∩ ball (no translation, fixed rhs)."""
    n = X.ambient_dim
    M = R.matrix
    rows = []
    for cx in X.cones:
        for p in Y.polytopes:
            ineq_A = np.vstack([-cx.pinv, p.A @ M.T])
            ineq_b = np.concatenate([np.zeros(cx.k), p.b])
            eq_A = np.vstack([cx.complement, p.E @ M.T])
            eq_b = np.concatenate([np.zeros(n - cx.k), p.f])
            rows.append((ineq_A, ineq_b, eq_A, eq_b))
    AU, bu, off_u, AE, be, off_e, _ = _assemble(rows, n)
    return PackedCompact(n, AU, bu, off_u, AE, be, off_e,
                         np.zeros((0, n)), np.zeros(0), radius)


def pack_polytope_flat(Y: PolytopeUnion, flat_complement: np.ndarray,
                       radius: float = 1.0) -> PackedCompact:
    """Cells of Y ∩ H ∩ ball for a linear flat H (complement rows given)."""
    n = Y.ambient_dim
    rows = []
    for p in Y.polytopes:
        rows.append((p.A.copy(), p.b.copy(), p.E.copy(), p.f.copy()))
    AU, bu, off_u, AE, be, off_e, _ = _assemble(rows, n)
    return PackedCompact(n, AU, bu, off_u, AE, be, off_e,
                         np.ascontiguousarray(flat_complement),
                         np.zeros(flat_complement.shape[0]), radius)


# ---------------------------------------------------------------------------
# kernel drivers

def chi_compact_packed(p: PackedCompact, delta: float | None,
                       config: Config = DEFAULT) -> ChiResult:
    """chi of a packed compact union; delta scales the rhs templates."""
    if delta is None:
        bu, be, bb = p.bu, p.be, p.base_be
    else:
        bu, be, bb = p.bu * delta, p.be * delta, p.base_be * delta
    chi, probed, st = K.chi_compact_union(
        p.AU, bu, p.off_u, p.AE, be, p.off_e, p.base_AE, bb, p.radius,
        config.subset_budget, *_tols(config), config.ball_band,
        config.dykstra_max_sweeps, config.dykstra_tol)
    _raise_for(st, probed)
    return ChiResult(int(chi), int(probed))


def chi_ladder_packed(p: PackedCompact, config: Config = DEFAULT) -> int:
    """Stabilized delta -> 0+ limit over the packed scene."""
    deltas = config.ladder_base * config.ladder_factor ** -np.arange(
        config.ladder_length, dtype=float)
    chi, _, st = K.chi_ladder_compact(
        p.AU, p.bu, p.off_u, p.AE, p.be, p.off_e, p.base_AE, p.base_be,
        deltas, p.radius, config.subset_budget, *_tols(config),
        config.ball_band, config.dykstra_max_sweeps, config.dykstra_tol)
    _raise_for(st)
    return int(chi)


def chi_link_packed(p: PackedLink, base_eq: np.ndarray | None = None,
                    config: Config = DEFAULT) -> ChiResult:
    base = (np.zeros((0, p.n)) if base_eq is None
            else np.ascontiguousarray(base_eq))
    chi, probed, st = K.chi_link(p.AU, p.off_u, p.AE, p.off_e, p.anchors,
                                 base, config.subset_budget, *_tols(config))
    _raise_for(st, probed)
    return ChiResult(int(chi), int(probed))


def chi_link_batch_packed(p: PackedLink, base_batch: np.ndarray,
                          config: Config = DEFAULT):
    """chi_link over a batch (B, K, n) of base equality-row sets.

    Returns (values int64[B], ok bool[B]); ok=False marks degenerate items.
    Budget and numerical failures raise.
    """
    out, st = K.chi_link_batch(p.AU, p.off_u, p.AE, p.off_e, p.anchors,
                               np.ascontiguousarray(base_batch),
                               config.subset_budget, *_tols(config))
    if np.any(st == K.BUDGET):
        raise BudgetExceeded("subset budget exceeded in a batched link query")
    if np.any(st == K.NUMFAIL):
        raise NumericalFailure("solver failure in a batched link query")
    return out, st == K.NONEMPTY


# ---------------------------------------------------------------------------
# public operations on ConvexCell queries

def _pack_query(q: CellUnionQuery):
    cells = list(q.cells)
    n = cells[0].ambient_dim if cells else 1
    rows = [(c.ineq_A, c.ineq_b, c.eq_A, c.eq_b) for c in cells]
    return rows, n


def euler_of_union(q: CellUnionQuery, config: Config = DEFAULT) -> ChiResult:
    """chi of the union of the query's cells (see module docstring)."""
    if q.mode is Mode.COMPACT_UNION:
        radius = None
        for c in q.cells:
            if c.ball is None:
                raise ValueError("COMPACT_UNION cells must carry a ball")
            center, r = c.ball
            if np.linalg.norm(np.asarray(center, dtype=float)) > 0:
                raise ValueError("ball constraints must be centered at 0")
            radius = r if radius is None else min(radius, r)
        rows, n = _pack_query(q)
        AU, bu, off_u, AE, be, off_e, _ = _assemble(rows, n)
        p = PackedCompact(n, AU, bu, off_u, AE, be, off_e,
                          np.zeros((0, n)), np.zeros(0),
                          radius if radius is not None else 1.0)
        return chi_compact_packed(p, None, config)
    # LINK mode
    if len(q.anchors) != len(q.cells):
        raise InvalidAnchor("LINK mode needs one anchor per cell")
    for c in q.cells:
        if np.any(c.ineq_b != 0) or np.any(c.eq_b != 0):
            raise ValueError("LINK cells must be cones through 0")
    for a in q.anchors:
        if a.k == 0:
            raise InvalidAnchor("anchor cone has no generators")
    rows, n = _pack_query(q)
    AU, _, off_u, AE, _, off_e, order = _assemble(rows, n)
    anchors = (np.array([q.anchors[i].anchor_row() for i in order])
               if order else np.zeros((0, n)))
    p = PackedLink(n, AU, off_u, AE, off_e, np.ascontiguousarray(anchors))
    return chi_link_packed(p, None, config)


def full_lattice_euler(q: CellUnionQuery, config: Config = DEFAULT) -> ChiResult:
    """Oracle: evaluate every one of the 2^m - 1 subsets, no pruning."""
    from itertools import combinations
    from . import feasibility as F

    cells = list(q.cells)
    m = len(cells)
    chi = 0
    probed = 0
    for size in range(1, m + 1):
        for subset in combinations(range(m), size):
            probed += 1
            if probed > config.subset_budget:
                raise BudgetExceeded("full-lattice budget exceeded")
            iA = np.vstack([cells[i].ineq_A for i in subset])
            ib = np.concatenate([cells[i].ineq_b for i in subset])
            eA = np.vstack([cells[i].eq_A for i in subset])
            eb = np.concatenate([cells[i].eq_b for i in subset])
            cell = ConvexCell(iA, ib, eA, eb)
            if q.mode is Mode.COMPACT_UNION:
                radius = min(cells[i].ball[1] for i in subset)
                v = F.polyhedron_nonempty(cell, config)
                if v.status is F.Status.DEGENERATE:
                    raise DegenerateSample("degenerate node in full lattice")
                if v.status is F.Status.EMPTY:
                    continue
                if np.linalg.norm(v.witness) <= radius * (1 - config.ball_band):
                    nonempty = True
                else:
                    d = F.min_norm_distance(cell, np.zeros(cell.ambient_dim),
                                            radius, config)
                    if d.status is F.Status.DEGENERATE:
                        raise DegenerateSample("degenerate ball margin")
                    nonempty = d.status is F.Status.NONEMPTY
            else:
                r = F.cone_cell_has_nonzero_point(cell, q.anchors[subset[0]],
                                                  config)
                if r is F.Status.DEGENERATE:
                    raise DegenerateSample("degenerate node in full lattice")
                nonempty = bool(r)
            if nonempty:
                chi += 1 if size % 2 == 1 else -1
    return ChiResult(chi, probed)


# ---------------------------------------------------------------------------
# germ-level operations

def chi_slice(X: ConicGerm, Y, R: Rotation | None, v, delta: float,
              radius: float = 1.0, config: Config = DEFAULT) -> ChiResult:
    """chi(X ∩ (R Y + delta v) ∩ ball(0, radius)).

    Y may be a ConicGerm or an AffineFlat through the origin; flats are
    handled in equality form (equivalently, pre-expanded to orthant cones).
    """
    if delta <= 0 or radius <= 0:
        raise ValueError("delta and radius must be positive")
    v = np.asarray(v, dtype=float)
    if R is None:
        R = Rotation.identity(X.ambient_dim)
    if isinstance(Y, AffineFlat):
        comp = Y.complement @ R.matrix.T
        p = pack_slice_flat(X, np.ascontiguousarray(comp), v, radius)
    else:
        p = pack_slice_pair(X, Y, R, v, radius)
    return chi_compact_packed(p, delta, config)


def chi_link_section(X: ConicGerm, extra_equalities=None,
                     R: Rotation | None = None, partner: ConicGerm | None = None,
                     config: Config = DEFAULT) -> ChiResult:
    """chi(Lk(X ∩ [R partner] ∩ {u_i . x = 0 ...})).

    extra_equalities: rows of linear forms through 0 (or None).
    """
    if partner is not None:
        if R is None:
            R = Rotation.identity(X.ambient_dim)
        p = pack_link_pair(X, partner, R)
    else:
        p = pack_link_germ(X)
    base = None
    if extra_equalities is not None:
        base = np.asarray(extra_equalities, dtype=float).reshape(-1, X.ambient_dim)
    return chi_link_packed(p, base, config)


def chi_link(X: ConicGerm, config: Config = DEFAULT) -> int:
    """chi(Lk X); deterministic, no sampling involved."""
    return chi_link_section(X, None, None, None, config).value


def stabilized_chi_limit(evaluator, config: Config = DEFAULT) -> int:
    """lim_{delta -> 0+} of an integer-valued evaluator.

    Evaluates on the ladder delta_r = base * factor^-r and returns the value
    once two consecutive rungs agree; raises Unstable otherwise.
    """
    prev = None
    for r in range(config.ladder_length):
        delta = config.ladder_base * config.ladder_factor ** -r
        value = evaluator(delta)
        if isinstance(value, ChiResult):
            value = value.value
        if prev is not None and value == prev:
            return int(value)
        prev = value
    raise Unstable("no two consecutive ladder rungs agreed")
