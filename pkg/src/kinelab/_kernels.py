"""Dense numerical kernels behind the feasibility and Euler modules.

Everything here operates on plain float64 arrays so the hot paths can be
compiled with numba. The same source runs uncompiled (set KINELAB_NO_NUMBA=1)
for debugging; compiled mode is the default and is required for the full
acceptance suite to finish in reasonable time.

Status codes shared by all kernels:
    0 = EMPTY, 1 = NONEMPTY, 2 = DEGENERATE, 3 = NUMERICAL_FAILURE,
    4 = BUDGET_EXCEEDED
"""

from __future__ import annotations

import os

import numpy as np

EMPTY = 0
NONEMPTY = 1
DEGENERATE = 2
NUMFAIL = 3
BUDGET = 4
UNSTABLE = 5

_USE_NUMBA = os.environ.get("KINELAB_NO_NUMBA", "") == ""

if _USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        _USE_NUMBA = False

if not _USE_NUMBA:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


@njit(cache=True, nogil=True)
def phase1_feasible(A, b, n_ineq, tol_pivot, tol_feas, tol_deg, witness_tol,
                    iter_factor):
    """Phase-1 simplex feasibility test for {A_i x <= b_i (i < n_ineq),
    A_i x = b_i (i >= n_ineq)}.

    Rows are normalized internally so the degeneracy bands are scale free.
    Bland's rule (lowest index) everywhere, which guarantees termination.
    Returns (status, x).
    """
    M, n = A.shape
    x = np.zeros(n)
    if M == 0:
        return NONEMPTY, x

    # normalize rows; resolve rows with (numerically) zero normals directly
    An = np.empty((M, n))
    bn = np.empty(M)
    keep = np.empty(M, np.bool_)
    for i in range(M):
        nrm = 0.0
        for j in range(n):
            nrm += A[i, j] * A[i, j]
        nrm = np.sqrt(nrm)
        if nrm < 1e-14:
            keep[i] = False
            ok = (b[i] >= -1e-12) if i < n_ineq else (abs(b[i]) <= 1e-12)
            if not ok:
                if abs(b[i]) < tol_deg:
                    return DEGENERATE, x
                return EMPTY, x
        else:
            keep[i] = True
            for j in range(n):
                An[i, j] = A[i, j] / nrm
            bn[i] = b[i] / nrm

    # compact kept rows, inequalities first
    rows = np.empty(M, np.int64)
    m = 0
    m_ub = 0
    for i in range(n_ineq):
        if keep[i]:
            rows[m] = i
            m += 1
            m_ub += 1
    for i in range(n_ineq, M):
        if keep[i]:
            rows[m] = i
            m += 1
    if m == 0:
        return NONEMPTY, x

    # count artificials: equalities always, inequalities with negative rhs
    n_art = 0
    for r in range(m):
        i = rows[r]
        if r >= m_ub or bn[i] < 0.0:
            n_art += 1

    ncols = 2 * n + m_ub + n_art + 1
    rhs = ncols - 1
    art0 = 2 * n + m_ub
    T = np.zeros((m, ncols))
    basis = np.empty(m, np.int64)
    cost = np.zeros(ncols)

    ai = 0
    for r in range(m):
        i = rows[r]
        sgn = 1.0 if bn[i] >= 0.0 else -1.0
        for j in range(n):
            v = sgn * An[i, j]
            T[r, j] = v
            T[r, n + j] = -v
        T[r, rhs] = sgn * bn[i]
        if r < m_ub:
            T[r, 2 * n + r] = sgn
            if sgn > 0.0:
                basis[r] = 2 * n + r
                continue
        T[r, art0 + ai] = 1.0
        basis[r] = art0 + ai
        ai += 1

    for j in range(n_art):
        cost[art0 + j] = 1.0
    # zero-out reduced costs of basic artificials
    for r in range(m):
        if basis[r] >= art0:
            for j in range(ncols):
                cost[j] -= T[r, j]

    itcap = iter_factor * (ncols - 1 + m)
    bland_after = itcap // 2
    # the entering cutoff is coarser than the pivot tolerance: accumulated
    # cost-row drift on long degenerate runs otherwise manufactures phantom
    # candidates around -tol_pivot; the phase-1 objective only needs the
    # accuracy of the tol_feas decision band
    enter_tol = 1e-9
    it = 0
    while it < itcap:
        # entering: most negative reduced cost while fresh (fast on the
        # degenerate vertices cone scenes produce), lowest index once the
        # iteration count suggests stalling (termination guarantee)
        e = -1
        if it < bland_after:
            best_c = -enter_tol
            for j in range(ncols - 1):
                if cost[j] < best_c:
                    best_c = cost[j]
                    e = j
        else:
            for j in range(ncols - 1):
                if cost[j] < -enter_tol:
                    e = j
                    break
        if e == -1:
            break
        lv = -1
        best = 0.0
        lv_basis = 0
        for r in range(m):
            if T[r, e] > tol_pivot:
                ratio = T[r, rhs] / T[r, e]
                if lv == -1 or ratio < best - 1e-12:
                    best = ratio
                    lv = r
                    lv_basis = basis[r]
                elif ratio <= best + 1e-12 and basis[r] < lv_basis:
                    lv = r
                    lv_basis = basis[r]
        if lv == -1:
            return NUMFAIL, x
        piv = T[lv, e]
        for j in range(ncols):
            T[lv, j] /= piv
        for r in range(m):
            if r != lv:
                f = T[r, e]
                if f != 0.0:
                    for j in range(ncols):
                        T[r, j] -= f * T[lv, j]
        f = cost[e]
        if f != 0.0:
            for j in range(ncols):
                cost[j] -= f * T[lv, j]
        basis[lv] = e
        it += 1
    if it >= itcap:
        return NUMFAIL, x

    w = 0.0
    for r in range(m):
        if basis[r] >= art0:
            w += T[r, rhs]

    if w >= tol_deg:
        return EMPTY, x
    if w > tol_feas:
        return DEGENERATE, x

    for r in range(m):
        c = basis[r]
        if c < n:
            x[c] += T[r, rhs]
        elif c < 2 * n:
            x[c - n] -= T[r, rhs]

    # witness check against the normalized rows (scale-relative)
    xs = 1.0
    for j in range(n):
        xs += x[j] * x[j]
    wtol = witness_tol * np.sqrt(xs)
    worst = 0.0
    for r in range(m):
        i = rows[r]
        s = -bn[i]
        for j in range(n):
            s += An[i, j] * x[j]
        if r >= m_ub:
            s = abs(s)
        if s > worst:
            worst = s
    if worst > wtol:
        return DEGENERATE, x
    return NONEMPTY, x


@njit(cache=True, nogil=True)
def _dedup_rows(An, bn, n_ineq):
    """Collapse duplicate rows; promote opposite inequality pairs to
    equalities; drop inequalities implied by an equality.

    Unions of orthant cones stack such rows structurally (adjacent cones
    share faces), and they make working sets singular. Expects normalized
    rows; returns (A2, b2, n_ineq2).
    """
    M, n = An.shape
    keep = np.ones(M, np.bool_)
    as_eq = np.zeros(M, np.bool_)
    tol = 1e-12
    for i in range(n_ineq, M):
        as_eq[i] = True
    # duplicate / opposite pairs among all rows
    for i in range(M):
        if not keep[i]:
            continue
        for j in range(i + 1, M):
            if not keep[j]:
                continue
            same = abs(bn[i] - bn[j]) <= tol
            opp = abs(bn[i] + bn[j]) <= tol
            if same or opp:
                for t in range(n):
                    if same and abs(An[i, t] - An[j, t]) > tol:
                        same = False
                    if opp and abs(An[i, t] + An[j, t]) > tol:
                        opp = False
                    if not (same or opp):
                        break
            if same or opp:
                if as_eq[i] or as_eq[j]:
                    # an equality absorbs duplicates and opposites
                    keep[j] = False
                    as_eq[i] = True
                elif same:
                    keep[j] = False
                else:
                    # opposite inequalities pin the hyperplane
                    keep[j] = False
                    as_eq[i] = True
    n_ineq2 = 0
    for i in range(M):
        if keep[i] and not as_eq[i]:
            n_ineq2 += 1
    total = 0
    for i in range(M):
        if keep[i]:
            total += 1
    A2 = np.empty((total, n))
    b2 = np.empty(total)
    p = 0
    for i in range(M):
        if keep[i] and not as_eq[i]:
            A2[p] = An[i]
            b2[p] = bn[i]
            p += 1
    for i in range(M):
        if keep[i] and as_eq[i]:
            A2[p] = An[i]
            b2[p] = bn[i]
            p += 1
    return A2, b2, n_ineq2


@njit(cache=True, nogil=True)
def _primal_qp(An, bn, n_ineq, center, x0, early_exit):
    """Projection of `center` onto normalized rows, from a feasible start.

    Primal active-set method for min 1/2 |z - center|^2: iterates stay
    feasible, the working set is solved as equalities through the KKT
    system (lstsq tolerates redundant rows), blocking rows are added by a
    lowest-index rule and rows with negative multipliers dropped. The final
    point satisfies the full KKT conditions, so it is the exact projection.

    If early_exit >= 0, returns as soon as a feasible iterate has
    |x - center| <= early_exit (status 2 = uncertified but inside).
    Returns (status, dist, z): 1 certified optimum, 2 early exit, 0 failed;
    on failure `dist` carries a certified lower bound on the distance
    (clipped duals are dual-feasible, so the dual value bounds below).
    """
    M, n = An.shape
    x = x0.copy()
    if early_exit >= 0.0:
        d0 = 0.0
        for j in range(n):
            d0 += (x[j] - center[j]) ** 2
        if np.sqrt(d0) <= early_exit:
            return 2, np.sqrt(d0), x

    in_w = np.zeros(M, np.bool_)
    for i in range(M):
        if i >= n_ineq:
            in_w[i] = True
        else:
            s = -bn[i]
            for j in range(n):
                s += An[i, j] * x[j]
            if s > -1e-9:
                in_w[i] = True

    idx = np.empty(M, np.int64)
    best_lb = 0.0
    cap = 10 * (M + n + 2)
    for _it in range(cap):
        k = 0
        for i in range(M):
            if in_w[i]:
                idx[k] = i
                k += 1
        # z = proj of center onto {A_W z = b_W}; mu from the same KKT system
        if k == 0:
            z = center.copy()
            mu = np.zeros(0)
        else:
            G = np.empty((k, k))
            r = np.empty(k)
            for p in range(k):
                ip = idx[p]
                s = -bn[ip]
                for j in range(n):
                    s += An[ip, j] * center[j]
                r[p] = s
                for t in range(p, k):
                    it2 = idx[t]
                    g = 0.0
                    for j in range(n):
                        g += An[ip, j] * An[it2, j]
                    G[p, t] = g
                    G[t, p] = g
            mu = np.linalg.lstsq(G, r)[0]
            z = center.copy()
            for p in range(k):
                ip = idx[p]
                if mu[p] != 0.0:
                    for j in range(n):
                        z[j] -= mu[p] * An[ip, j]

        musum = 0.0
        for p in range(k):
            musum += abs(mu[p])

        # dual value at the sign-clipped multipliers lower-bounds the
        # distance: g = mu.(A c - b) - |A^T mu|^2 / 2 <= dist^2 / 2
        if k > 0:
            gval = 0.0
            for j in range(n):
                at = 0.0
                for p in range(k):
                    mp = mu[p]
                    if idx[p] < n_ineq and mp < 0.0:
                        mp = 0.0
                    at += mp * An[idx[p], j]
                gval -= 0.5 * at * at
            for p in range(k):
                mp = mu[p]
                if idx[p] < n_ineq and mp < 0.0:
                    mp = 0.0
                s = -bn[idx[p]]
                for j in range(n):
                    s += An[idx[p], j] * center[j]
                gval += mp * s
            if gval > 0.0:
                lb = np.sqrt(2.0 * gval)
                if lb > best_lb:
                    best_lb = lb

        # step distance from x to z; the stationarity floor accounts for
        # round-off in z, which scales with the dual magnitudes on
        # ill-conditioned working sets
        step2 = 0.0
        scale2 = 1.0
        for j in range(n):
            step2 += (z[j] - x[j]) ** 2
            scale2 += x[j] * x[j] + z[j] * z[j]
        floor = 3e-13 * (1.0 + musum)

        if step2 <= 1e-20 * scale2 + floor * floor:
            # at the working-set optimum: check dual signs
            worst_p = -1
            worst_mu = -1e-10
            for p in range(k):
                if idx[p] < n_ineq and mu[p] < worst_mu:
                    worst_mu = mu[p]
                    worst_p = p
            if worst_p >= 0:
                in_w[idx[worst_p]] = False
                continue
            # certify full primal feasibility (guards an infeasible seed)
            xs = 1.0
            for j in range(n):
                xs += x[j] * x[j]
            ftol = 1e-8 * np.sqrt(xs)
            ok = True
            for i in range(M):
                s = -bn[i]
                for j in range(n):
                    s += An[i, j] * x[j]
                if i >= n_ineq:
                    s = abs(s)
                if s > ftol:
                    ok = False
                    break
            if not ok:
                return 0, 0.0, x
            d = 0.0
            for j in range(n):
                d += (x[j] - center[j]) ** 2
            return 1, np.sqrt(d), x

        # line search toward z against rows outside the working set; the
        # slack keeps boundary noise from re-blocking a just-dropped row
        slack = 1e-11 * np.sqrt(scale2)
        alpha = 1.0
        block = -1
        for i in range(n_ineq):
            if not in_w[i]:
                ad = 0.0
                ax = 0.0
                for j in range(n):
                    ad += An[i, j] * (z[j] - x[j])
                    ax += An[i, j] * x[j]
                if ad > 1e-13:
                    a = (bn[i] - ax + slack) / ad
                    if a < alpha - 1e-14:
                        alpha = a
                        block = i
            # rows in W keep a . (z - x) = 0 up to lstsq error
        if alpha < 0.0:
            alpha = 0.0
        for j in range(n):
            x[j] = x[j] + alpha * (z[j] - x[j])
        if block >= 0:
            in_w[block] = True
        if early_exit >= 0.0:
            d0 = 0.0
            for j in range(n):
                d0 += (x[j] - center[j]) ** 2
            if np.sqrt(d0) <= early_exit:
                return 2, np.sqrt(d0), x
    return 0, best_lb, x


@njit(cache=True, nogil=True)
def _normalize_rows(A, b):
    M, n = A.shape
    An = np.empty((M, n))
    bn = np.empty(M)
    for i in range(M):
        nrm = 0.0
        for j in range(n):
            nrm += A[i, j] * A[i, j]
        nrm = np.sqrt(nrm)
        if nrm < 1e-14:
            # trivial row; make any projection a no-op
            for j in range(n):
                An[i, j] = 0.0
            bn[i] = 1.0
        else:
            for j in range(n):
                An[i, j] = A[i, j] / nrm
            bn[i] = b[i] / nrm
    return An, bn


@njit(cache=True, nogil=True)
def min_norm_point(A, b, n_ineq, center, max_sweeps, move_tol, act_band,
                   feas_tol):
    """Projection of `center` onto {A_i x <= b_i} ∩ {A_j x = b_j}.

    Dykstra alternating projections interleaved with a certifying
    active-set polish (dual NNLS); the polish exits as soon as the KKT
    conditions hold, which makes the returned point exact. Caller
    guarantees the set is nonempty. Returns (status, dist, x).
    """
    M, n = A.shape
    if M == 0:
        return NONEMPTY, 0.0, center.copy()
    An0, bn0 = _normalize_rows(A, b)
    An, bn, n_ineq = _dedup_rows(An0, bn0, n_ineq)
    M = An.shape[0]

    st0, x0 = phase1_feasible(An, bn, n_ineq, 1e-11, 1e-9, 1e-7, 1e-6, 10)
    if st0 == NONEMPTY:
        st, dist, z = _primal_qp(An, bn, n_ineq, center, x0, -1.0)
        if st == 1:
            return NONEMPTY, dist, z

    x = center.copy()
    P = np.zeros((M, n))
    y = np.empty(n)
    for sweep in range(max_sweeps):
        maxmove = 0.0
        for i in range(M):
            for j in range(n):
                y[j] = x[j] + P[i, j]
            viol = -bn[i]
            for j in range(n):
                viol += An[i, j] * y[j]
            if i < n_ineq and viol < 0.0:
                viol = 0.0
            for j in range(n):
                zj = y[j] - viol * An[i, j]
                P[i, j] = y[j] - zj
                x[j] = zj
            a = abs(viol)
            if a > maxmove:
                maxmove = a
        if maxmove < move_tol:
            # converged without a KKT certificate; accept the iterate
            d = 0.0
            for j in range(n):
                d += (x[j] - center[j]) ** 2
            return NONEMPTY, np.sqrt(d), x
        if sweep % 64 == 63:
            # polish: the Dykstra iterate seeds a fresh active-set pass
            st, dist, z = _primal_qp(An, bn, n_ineq, center, x, -1.0)
            if st == 1:
                return NONEMPTY, dist, z
    return NUMFAIL, 0.0, x


@njit(cache=True, nogil=True)
def _node_feasible_compact(SAU, Sbu, nu, SAE, Sbe, ne, radius, origin,
                           tol_pivot, tol_feas, tol_deg, witness_tol,
                           iter_factor, ball_band, max_sweeps, move_tol):
    """Feasibility of a stacked polyhedron intersected with the centered ball.

    Non-convergent nodes come back DEGENERATE: they occur on (near-)
    degenerate geometry only, and the Monte Carlo layer discards and
    resamples the ambient draw, counting the event against the budget.
    """
    M = nu + ne
    A = np.empty((M, SAU.shape[1]))
    b = np.empty(M)
    for i in range(nu):
        A[i] = SAU[i]
        b[i] = Sbu[i]
    for i in range(ne):
        A[nu + i] = SAE[i]
        b[nu + i] = Sbe[i]
    An0, bn0 = _normalize_rows(A, b)
    An, bn, nu2 = _dedup_rows(An0, bn0, nu)
    st, x = phase1_feasible(An, bn, nu2, tol_pivot, tol_feas, tol_deg,
                            witness_tol, iter_factor)
    if st == NUMFAIL:
        return DEGENERATE
    if st != NONEMPTY:
        return st
    nrm = 0.0
    for j in range(x.shape[0]):
        nrm += x[j] * x[j]
    nrm = np.sqrt(nrm)
    if nrm <= radius * (1.0 - ball_band):
        return NONEMPTY
    st, dist, z = _primal_qp(An, bn, nu2, origin, x,
                             radius * (1.0 - ball_band))
    if st == 2:
        return NONEMPTY
    if st == 0:
        # dist holds a certified lower bound on failure
        if dist >= radius * (1.0 + ball_band):
            return EMPTY
        st2, dist, _ = min_norm_point(A, b, nu, origin, max_sweeps,
                                      move_tol, tol_deg, tol_feas)
        if st2 != NONEMPTY:
            return DEGENERATE
    if dist <= radius * (1.0 - ball_band):
        return NONEMPTY
    if dist >= radius * (1.0 + ball_band):
        return EMPTY
    return DEGENERATE


@njit(cache=True, nogil=True)
def chi_compact_union(AU, bu, off_u, AE, be, off_e, base_AE, base_be, radius,
                      budget, tol_pivot, tol_feas, tol_deg, witness_tol,
                      iter_factor, ball_band, max_sweeps, move_tol):
    """Euler characteristic of a union of compact convex cells.

    chi = sum over nonempty intersections of (-1)^(|S|+1); depth-first subset
    search pruned at the first empty intersection. Cells are the closed
    convex sets {rows of cell c} ∩ ball(0, radius); base_* rows are appended
    to every query. Returns (chi, probed, status).
    """
    m = off_u.shape[0] - 1
    n = AU.shape[1]
    nbase = base_AE.shape[0]
    Ru = AU.shape[0]
    Re = AE.shape[0] + nbase

    SAU = np.empty((Ru, n))
    Sbu = np.empty(Ru)
    SAE = np.empty((Re, n))
    Sbe = np.empty(Re)
    for i in range(nbase):
        SAE[i] = base_AE[i]
        Sbe[i] = base_be[i]

    origin = np.zeros(n)
    path = np.empty(m, np.int64)
    start = np.empty(m + 1, np.int64)
    cu = np.empty(m + 1, np.int64)
    ce = np.empty(m + 1, np.int64)

    chi = 0
    probed = 0
    level = 0
    start[0] = 0
    cu[0] = 0
    ce[0] = nbase

    while level >= 0:
        advanced = False
        c = start[level]
        while c < m:
            nu = cu[level]
            ne = ce[level]
            for r in range(off_u[c], off_u[c + 1]):
                SAU[nu] = AU[r]
                Sbu[nu] = bu[r]
                nu += 1
            for r in range(off_e[c], off_e[c + 1]):
                SAE[ne] = AE[r]
                Sbe[ne] = be[r]
                ne += 1
            probed += 1
            if probed > budget:
                return chi, probed, BUDGET
            st = _node_feasible_compact(SAU, Sbu, nu, SAE, Sbe, ne, radius,
                                        origin, tol_pivot, tol_feas, tol_deg,
                                        witness_tol, iter_factor, ball_band,
                                        max_sweeps, move_tol)
            if st == DEGENERATE or st == NUMFAIL:
                return chi, probed, st
            if st == NONEMPTY:
                if level % 2 == 0:
                    chi += 1
                else:
                    chi -= 1
                path[level] = c
                start[level] = c + 1
                cu[level + 1] = nu
                ce[level + 1] = ne
                start[level + 1] = c + 1
                level += 1
                advanced = True
                break
            c += 1
        if not advanced:
            if c >= m:
                level -= 1
    return chi, probed, NONEMPTY


@njit(cache=True, nogil=True)
def chi_link(AU, off_u, AE, off_e, anchors, base_AE, budget, tol_pivot,
             tol_feas, tol_deg, witness_tol, iter_factor):
    """Euler characteristic of Lk(union of pointed cone cells).

    All rows are homogeneous. A subset intersection contributes 1 iff it
    contains a nonzero point, decided by feasibility of the intersection
    together with the anchor normalization row (sum of barycentric
    coordinates in the first member's anchor cone equal to 1); links of
    pointed cones are contractible or empty, so this is exact.
    Returns (chi, probed, status).
    """
    m = off_u.shape[0] - 1
    n = anchors.shape[1]
    nbase = base_AE.shape[0]
    Ru = AU.shape[0]
    Re = AE.shape[0] + nbase + 1

    SAU = np.empty((Ru, n))
    Sbu = np.empty(Ru)
    SAE = np.empty((Re, n))
    Sbe = np.empty(Re)
    for i in range(nbase):
        SAE[i] = base_AE[i]
        Sbe[i] = 0.0

    path = np.empty(m, np.int64)
    start = np.empty(m + 1, np.int64)
    cu = np.empty(m + 1, np.int64)
    ce = np.empty(m + 1, np.int64)

    chi = 0
    probed = 0
    level = 0
    start[0] = 0
    cu[0] = 0
    ce[0] = nbase

    M_A = np.empty((Ru + Re, n))
    M_b = np.empty(Ru + Re)

    while level >= 0:
        advanced = False
        c = start[level]
        while c < m:
            nu = cu[level]
            ne = ce[level]
            for r in range(off_u[c], off_u[c + 1]):
                SAU[nu] = AU[r]
                Sbu[nu] = 0.0
                nu += 1
            for r in range(off_e[c], off_e[c + 1]):
                SAE[ne] = AE[r]
                Sbe[ne] = 0.0
                ne += 1
            probed += 1
            if probed > budget:
                return chi, probed, BUDGET
            anchor_cell = path[0] if level > 0 else c
            M = nu + ne + 1
            for i in range(nu):
                M_A[i] = SAU[i]
                M_b[i] = 0.0
            for i in range(ne):
                M_A[nu + i] = SAE[i]
                M_b[nu + i] = 0.0
            M_A[nu + ne] = anchors[anchor_cell]
            M_b[nu + ne] = 1.0
            An0, bn0 = _normalize_rows(M_A[:M], M_b[:M])
            An, bn, nu3 = _dedup_rows(An0, bn0, nu)
            st, _ = phase1_feasible(An, bn, nu3, tol_pivot, tol_feas,
                                    tol_deg, witness_tol, iter_factor)
            if st == NUMFAIL:
                st = DEGENERATE
            if st == DEGENERATE:
                return chi, probed, st
            if st == NONEMPTY:
                if level % 2 == 0:
                    chi += 1
                else:
                    chi -= 1
                path[level] = c
                start[level] = c + 1
                cu[level + 1] = nu
                ce[level + 1] = ne
                start[level + 1] = c + 1
                level += 1
                advanced = True
                break
            c += 1
        if not advanced:
            if c >= m:
                level -= 1
    return chi, probed, NONEMPTY


@njit(cache=True, nogil=True)
def chi_link_batch(AU, off_u, AE, off_e, anchors, base_batch, budget,
                   tol_pivot, tol_feas, tol_deg, witness_tol, iter_factor):
    """chi_link over a batch of base equality-row sets (B, K, n)."""
    B = base_batch.shape[0]
    out = np.empty(B, np.int64)
    status = np.empty(B, np.int64)
    for t in range(B):
        c, _, st = chi_link(AU, off_u, AE, off_e, anchors, base_batch[t],
                            budget, tol_pivot, tol_feas, tol_deg, witness_tol,
                            iter_factor)
        out[t] = c
        status[t] = st
    return out, status


@njit(cache=True, nogil=True)
def chi_ladder_compact(AU, bu, off_u, AE, be, off_e, base_AE, base_be,
                       deltas, radius, budget, tol_pivot, tol_feas, tol_deg,
                       witness_tol, iter_factor, ball_band, max_sweeps,
                       move_tol):
    """Stabilized delta-limit of chi_compact_union on a conic scene.

    The scene is given at delta = 1. Because both germs are conic,
    chi at (delta_r, radius) equals chi at (1, radius / delta_r), so each
    rung is evaluated by growing the ball instead of shrinking the
    translation; this keeps every feasibility margin at unit scale.
    Walks the ladder until two consecutive rungs agree; status NONEMPTY on
    success, DEGENERATE/NUMFAIL/BUDGET propagate, UNSTABLE if the ladder is
    exhausted. Returns (chi, rungs_used, status).
    """
    prev = 0
    have_prev = False
    for r in range(deltas.shape[0]):
        c, _, st = chi_compact_union(AU, bu, off_u, AE, be, off_e, base_AE,
                                     base_be, radius / deltas[r], budget,
                                     tol_pivot, tol_feas, tol_deg,
                                     witness_tol, iter_factor, ball_band,
                                     max_sweeps, move_tol)
        if st != NONEMPTY:
            return c, r + 1, st
        if have_prev and c == prev:
            return c, r + 1, NONEMPTY
        prev = c
        have_prev = True
    return prev, deltas.shape[0], UNSTABLE
