"""Ambient linear algebra: simplicial cones, conic germs, flats, rotations.

A germ is represented as a finite union of simplicial cones with linearly
independent generators. Pointedness of every cone (and hence of every
intersection of cones) is structural, which is what the Euler module's link
rule relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Config
from .errors import DimensionMismatch, RankDeficient

__all__ = [
    "SimplicialCone",
    "ConicGerm",
    "AffineFlat",
    "Rotation",
    "PolytopeUnion",
    "build_cone",
    "rotate_germ",
    "tangent_cone",
    "flat_cone_union",
    "full_space_germ",
    "orthonormal_complement",
]


def _as_matrix(vectors, ambient_dim=None) -> np.ndarray:
    """Stack vectors as rows of a float64 matrix; validate finiteness."""
    if len(vectors) == 0:
        if ambient_dim is None:
            raise DimensionMismatch("empty generator list needs an ambient_dim")
        return np.zeros((0, ambient_dim))
    m = np.asarray(vectors, dtype=float)
    if m.ndim == 1:
        m = m[None, :]
    if not np.all(np.isfinite(m)):
        raise ValueError("non-finite coordinates")
    if ambient_dim is not None and m.shape[1] != ambient_dim:
        raise DimensionMismatch(
            f"expected vectors in R^{ambient_dim}, got R^{m.shape[1]}")
    return m


def orthonormal_complement(basis_rows: np.ndarray, n: int,
                           tol: float = 1e-12) -> np.ndarray:
    """Rows spanning the orthogonal complement of span(basis_rows) in R^n."""
    if basis_rows.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(basis_rows, full_matrices=True)
    rank = int(np.sum(s > tol * (s[0] if s.size else 1.0)))
    return vt[rank:]


@dataclass(frozen=True)
class SimplicialCone:
    """Cone {sum lambda_i g_i : lambda >= 0} with independent generators.

    Cached at construction: `pinv` (the dual map G+, mapping a point of the
    span to its generator coordinates), `span_projector` P, and the
    orthonormal complement rows of the span. Membership law:
    x in cone  iff  P x = x and G+ x >= 0 componentwise.
    """

    generators: np.ndarray          # (k, n), rows are generators
    pinv: np.ndarray = field(repr=False, default=None)        # (k, n)
    span_projector: np.ndarray = field(repr=False, default=None)   # (n, n)
    complement: np.ndarray = field(repr=False, default=None)  # (n-k, n)

    @property
    def ambient_dim(self) -> int:
        return self.generators.shape[1]

    @property
    def k(self) -> int:
        return self.generators.shape[0]

    def contains(self, x: np.ndarray, tol: float = 1e-10) -> bool:
        x = np.asarray(x, dtype=float)
        if self.k == 0:
            return bool(np.linalg.norm(x) <= tol)
        if np.linalg.norm(self.span_projector @ x - x) > tol * (1 + np.linalg.norm(x)):
            return False
        return bool(np.min(self.pinv @ x) >= -tol * (1 + np.linalg.norm(x)))

    def anchor_row(self) -> np.ndarray:
        """Row s with s.x = sum of generator coordinates of x (x in span)."""
        return self.pinv.sum(axis=0)


def build_cone(generators, ambient_dim=None,
               config: Config = DEFAULT) -> SimplicialCone:
    """Construct a simplicial cone, rejecting dependent generator sets.

    An empty generator list encodes the cone {0}.
    """
    G = _as_matrix(generators, ambient_dim)
    k, n = G.shape
    if k == 0:
        return SimplicialCone(G, np.zeros((0, n)), np.zeros((n, n)), np.eye(n))
    if k > n:
        raise RankDeficient(f"{k} generators cannot be independent in R^{n}")
    u, s, vt = np.linalg.svd(G, full_matrices=False)
    if s[-1] < config.svd_rel_cutoff * s[0]:
        raise RankDeficient(
            f"generator matrix numerically rank-deficient "
            f"(sigma_min/sigma_max = {s[-1] / s[0]:.2e})")
    pinv = (vt.T * (1.0 / s)) @ u.T            # (n, k) -> transpose below
    pinv = pinv.T                              # (k, n): G+ with G+ G = I_k
    projector = vt.T @ vt
    complement = orthonormal_complement(G, n)
    return SimplicialCone(G, pinv, projector, complement)


@dataclass(frozen=True)
class ConicGerm:
    """Germ (X, 0): the union of finitely many simplicial cones.

    For this representation the set is closed, conic, and equal to its own
    tangent cone at the origin. `flat_basis` is set when the germ is the
    expansion of a linear subspace; estimators may then use the equality
    form of the flat directly (same values, fewer cells).
    """

    ambient_dim: int
    cones: tuple
    label: str = ""
    flat_basis: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        for c in self.cones:
            if c.ambient_dim != self.ambient_dim:
                raise DimensionMismatch(
                    f"cone in R^{c.ambient_dim} inside germ in R^{self.ambient_dim}")

    @property
    def dim(self) -> int:
        """Structural dimension: the largest generator count of any cone."""
        if not self.cones:
            return 0
        return max(c.k for c in self.cones)

    def contains(self, x, tol: float = 1e-10) -> bool:
        return any(c.contains(x, tol) for c in self.cones)

    def is_empty(self) -> bool:
        return len(self.cones) == 0


def germ(cones, ambient_dim=None, label="") -> ConicGerm:
    cones = tuple(cones)
    if ambient_dim is None:
        if not cones:
            raise DimensionMismatch("empty germ needs an explicit ambient_dim")
        ambient_dim = cones[0].ambient_dim
    return ConicGerm(ambient_dim, cones, label)


@dataclass(frozen=True)
class AffineFlat:
    """basepoint + span(basis); basis and complement rows are orthonormal."""

    basepoint: np.ndarray
    basis: np.ndarray          # (j, n)
    complement: np.ndarray     # (n-j, n)

    def __post_init__(self):
        n = self.basepoint.shape[0]
        for m in (self.basis, self.complement):
            if m.shape[0]:
                r = np.abs(m @ m.T - np.eye(m.shape[0])).max()
                if r > 1e-12:
                    raise ValueError(f"orthonormality residual {r:.2e}")
        if self.basis.shape[0] + self.complement.shape[0] != n:
            raise DimensionMismatch("basis + complement must span R^n")

    @property
    def ambient_dim(self) -> int:
        return self.basepoint.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[0]


def _sign_fixed(rows: np.ndarray) -> np.ndarray:
    """Flip row signs so the leading nonzero entry is positive; makes
    orthonormalizations reproducible across round trips."""
    out = rows.copy()
    for i in range(out.shape[0]):
        for v in out[i]:
            if abs(v) > 1e-13:
                if v < 0:
                    out[i] = -out[i]
                break
    return out + 0.0          # clears negative zeros


def linear_flat(basis_rows, n: int) -> AffineFlat:
    """Flat through the origin spanned by the given (independent) rows."""
    B = _as_matrix(basis_rows, n)
    if B.shape[0]:
        q, _ = np.linalg.qr(B.T)
        B = _sign_fixed(q.T[:B.shape[0]])
    return AffineFlat(np.zeros(n), B, orthonormal_complement(B, n))


@dataclass(frozen=True)
class Rotation:
    """Element of SO(n), validated at construction."""

    matrix: np.ndarray

    def __post_init__(self):
        R = self.matrix
        n = R.shape[0]
        if R.shape != (n, n):
            raise DimensionMismatch("rotation matrix must be square")
        if np.abs(R.T @ R - np.eye(n)).max() > 1e-12:
            raise ValueError("rotation not orthogonal to 1e-12")
        if abs(np.linalg.det(R) - 1.0) > 1e-10:
            raise ValueError("rotation must have determinant 1")

    @property
    def ambient_dim(self) -> int:
        return self.matrix.shape[0]

    @staticmethod
    def identity(n: int) -> "Rotation":
        return Rotation(np.eye(n))

    def compose(self, other: "Rotation") -> "Rotation":
        return Rotation(self.matrix @ other.matrix)


def rotate_germ(R: Rotation, X: ConicGerm) -> ConicGerm:
    """The germ R X; every generator is replaced by R g."""
    if R.ambient_dim != X.ambient_dim:
        raise DimensionMismatch("rotation and germ dimensions differ")
    M = R.matrix
    cones = tuple(
        SimplicialCone(c.generators @ M.T, c.pinv @ M.T,
                       M @ c.span_projector @ M.T, c.complement @ M.T)
        for c in X.cones)
    fb = None if X.flat_basis is None else X.flat_basis @ M.T
    return ConicGerm(X.ambient_dim, cones, X.label, fb)


def tangent_cone(X: ConicGerm) -> ConicGerm:
    """Tangent cone at the origin; conic sets are their own tangent cone."""
    return X


def flat_cone_union(basis_rows, n: int, label: str = "") -> ConicGerm:
    """A k-dimensional linear subspace as the union of 2^k orthant cones."""
    B = _as_matrix(basis_rows, n)
    k = B.shape[0]
    if k:
        q, _ = np.linalg.qr(B.T)
        B = _sign_fixed(q.T[:k])
    if k == 0:
        return ConicGerm(n, (build_cone([], n),), label, B)
    cones = []
    for mask in range(2 ** k):
        signs = np.array([1.0 if (mask >> i) & 1 == 0 else -1.0
                          for i in range(k)])
        cones.append(build_cone(B * signs[:, None]))
    return ConicGerm(n, tuple(cones), label, B)


def full_space_germ(n: int, label: str = "") -> ConicGerm:
    return flat_cone_union(np.eye(n), n, label)


@dataclass(frozen=True)
class Polytope:
    """Bounded convex polytope: vertex list plus cached H-representation.

    The H-representation is A x <= b together with equality rows E x = f
    for the affine hull when the polytope is not full-dimensional.
    """

    vertices: np.ndarray       # (v, n)
    A: np.ndarray              # (m, n)
    b: np.ndarray              # (m,)
    E: np.ndarray              # (e, n)
    f: np.ndarray              # (e,)

    @property
    def ambient_dim(self) -> int:
        return self.vertices.shape[1]


def build_polytope(vertices) -> Polytope:
    """V-representation to H-representation, handling lower-dimensional hulls."""
    V = _as_matrix(vertices)
    if not np.all(np.isfinite(V)):
        raise ValueError("polytope vertices must be finite")
    n = V.shape[1]
    centroid = V.mean(axis=0)
    D = V - centroid
    # affine hull
    _, s, vt = np.linalg.svd(D, full_matrices=True)
    scale = s[0] if s.size and s[0] > 0 else 1.0
    hull_dim = int(np.sum(s > 1e-10 * scale))
    basis = vt[:hull_dim]
    E = vt[hull_dim:]
    f = E @ centroid
    if hull_dim == 0:
        return Polytope(V, np.zeros((0, n)), np.zeros(0), E, f)
    P = D @ basis.T            # coordinates inside the hull
    if hull_dim == 1:
        lo, hi = P[:, 0].min(), P[:, 0].max()
        A = np.vstack([basis, -basis])
        b = np.array([hi + basis[0] @ centroid, -(lo + basis[0] @ centroid)])
        return Polytope(V, A, b, E, f)
    from scipy.spatial import ConvexHull
    hull = ConvexHull(P)
    # hull.equations: rows [normal | offset] with normal.x + offset <= 0
    Ah = hull.equations[:, :-1] @ basis
    bh = -hull.equations[:, -1] + Ah @ centroid
    return Polytope(V, Ah, bh, E, f)


@dataclass(frozen=True)
class PolytopeUnion:
    """Finite union of bounded polytopes; the Prop-6.1 style scene object."""

    ambient_dim: int
    polytopes: tuple
    label: str = ""

    def __post_init__(self):
        for p in self.polytopes:
            if p.ambient_dim != self.ambient_dim:
                raise DimensionMismatch("polytope dimension mismatch")

    def max_vertex_norm(self) -> float:
        r = 0.0
        for p in self.polytopes:
            if p.vertices.size:
                r = max(r, float(np.linalg.norm(p.vertices, axis=1).max()))
        return r

    def contains(self, x, tol=1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        for p in self.polytopes:
            ok = True
            if p.A.shape[0] and np.max(p.A @ x - p.b) > tol:
                ok = False
            if ok and p.E.shape[0] and np.max(np.abs(p.E @ x - p.f)) > tol:
                ok = False
            if ok:
                return True
        return False
