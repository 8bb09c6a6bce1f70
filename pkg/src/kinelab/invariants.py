"""Scoped local invariants of conic germs.

sigma_k: mean Euler characteristic of the germ sliced by a random affine
flat of codimension k translated infinitesimally off the origin.

lambda_lim: Lipschitz-Killing limits, computed through the link formulas;
with T(j) = E over j-planes H of chi(Lk(X ∩ H)), T(0) = 0 and
T(n) = chi(Lk X) deterministic,

    L_0 = 1 - T(n)/2 - T(n-1)/2
    L_k = (T(n-k+1) - T(n-k-1)) / 2      (1 <= k <= n-1)
    L_n = T(1) / 2.

All rotation / sphere / Grassmannian integrals are expectations: the
normalizations 1/g_n^k and 1/s_{n-1} cancel throughout, so none of those
volumes is ever needed numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Config
from .errors import DegenerateSample, DimensionMismatch
from .euler import (PackedLink, chi_ladder_packed, chi_link_batch_packed,
                    chi_link_packed, pack_link_germ, pack_link_pair,
                    pack_slice_flat, pack_slice_pair)
from .geometry import ConicGerm, Rotation, orthonormal_complement
from .sampling import (McEstimate, SampleStream, derive_seed, mc_estimate,
                       mc_estimate_vector, sphere_in_subspace)

__all__ = [
    "Constants",
    "sphere_volume",
    "ball_volume",
    "InvariantProfile",
    "LambdaProfile",
    "sigma_k",
    "sigma_profile",
    "lambda_lim_profile",
    "pair_lambda_profile",
    "density",
    "sigma_pair",
    "lambda0_pair",
    "beta0_bar",
    "sigma_to_lambda_loc",
    "invariant_profile",
]


# ---------------------------------------------------------------------------
# closed-form constants

def sphere_volume(k: int) -> float:
    """Volume of the unit k-sphere: s_k = 2 pi^((k+1)/2) / Gamma((k+1)/2)."""
    if k < 0:
        raise ValueError("sphere dimension must be >= 0")
    return 2.0 * math.pi ** ((k + 1) / 2.0) / math.gamma((k + 1) / 2.0)


def ball_volume(k: int) -> float:
    """Volume of the unit k-ball: b_k = pi^(k/2) / Gamma(k/2 + 1)."""
    if k < 0:
        raise ValueError("ball dimension must be >= 0")
    return math.pi ** (k / 2.0) / math.gamma(k / 2.0 + 1.0)


@dataclass(frozen=True)
class Constants:
    """Sphere/ball volumes and the classical kinematic coefficients."""

    n: int
    s: tuple = ()
    b: tuple = ()

    @staticmethod
    def for_dimension(n: int) -> "Constants":
        return Constants(n, tuple(sphere_volume(k) for k in range(n + 1)),
                         tuple(ball_volume(k) for k in range(n + 1)))

    def e(self, p: int, q: int, n: int | None = None) -> float:
        n = self.n if n is None else n
        if p + q < n:
            raise ValueError("e(p, q, n) needs p + q >= n")
        return (sphere_volume(p + q - n) * sphere_volume(n)
                / (sphere_volume(p) * sphere_volume(q)))

    def m(self, i: int, j: int) -> float:
        """Unitriangular transform coefficient, i + 1 <= j."""
        if not 1 <= i < j:
            raise ValueError("m(i, j) defined for 1 <= i < j")
        t1 = (ball_volume(j) / (ball_volume(j - i) * ball_volume(i))
              * math.comb(j, i))
        t2 = (ball_volume(j - 1) / (ball_volume(j - 1 - i) * ball_volume(i))
              * math.comb(j - 1, i))
        return t1 - t2


def sigma_to_lambda_loc(sigma) -> np.ndarray:
    """Apply the unitriangular polar-to-local transform.

    Input sigma[0..n]; output the local Lipschitz-Killing invariants
    Lambda^loc[1..n] = sigma_i + sum_{j > i} m_i^j sigma_j.
    """
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0] - 1
    c = Constants.for_dimension(n)
    out = np.empty(n)
    for i in range(1, n + 1):
        v = sigma[i]
        for j in range(i + 1, n + 1):
            v += c.m(i, j) * sigma[j]
        out[i - 1] = v
    return out


# ---------------------------------------------------------------------------
# sigma_k

def _membership_indicator(X: ConicGerm):
    def integrand(stream: SampleStream) -> float:
        rng = stream.generator()
        v = sphere_in_subspace(rng, np.eye(X.ambient_dim))
        return 1.0 if X.contains(v) else 0.0
    return integrand


def _slice_integrand(X: ConicGerm, k: int, config: Config):
    """Integrand for sigma_k, 0 < k <= n: flat of dim n-k plus offset
    direction in its orthogonal complement."""
    n = X.ambient_dim

    def integrand(stream: SampleStream) -> float:
        rng = stream.generator()
        g = rng.standard_normal((n, n - k))
        q, _ = np.linalg.qr(g, mode="complete")
        comp = np.ascontiguousarray(q[:, n - k:].T)    # rows span H-perp
        v = sphere_in_subspace(rng, comp)
        packed = pack_slice_flat(X, comp, v, 1.0)
        return float(chi_ladder_packed(packed, config))
    return integrand


def sigma_k(X: ConicGerm, k: int, n_samples: int, seed: int,
            workers: int = 1, config: Config = DEFAULT) -> McEstimate:
    """Polar invariant sigma_k of a conic germ.

    k = 0 is 1 by definition; k = n is the spherical membership fraction;
    0 < k < n averages the stabilized slice Euler characteristic over
    (H in G_n^{n-k}, v in the unit sphere of H-perp).
    """
    n = X.ambient_dim
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    if k == 0:
        return McEstimate.exact_value(1.0)
    if k == n:
        return mc_estimate(_membership_indicator(X), n_samples, seed,
                           workers, config)
    return mc_estimate(_slice_integrand(X, k, config), n_samples, seed,
                       workers, config)


def sigma_profile(X: ConicGerm, n_samples: int, seed: int, workers: int = 1,
                  config: Config = DEFAULT) -> list:
    """All sigma_k, independent streams per k."""
    return [sigma_k(X, k, n_samples, derive_seed(seed, "sigma", k),
                    workers, config)
            for k in range(X.ambient_dim + 1)]


# ---------------------------------------------------------------------------
# lambda_lim via the link formulas

def _lambda_terms(n: int):
    """Per-degree (constant?, [(j, coef)]) decomposition over T(j)."""
    terms = []
    for k in range(n + 1):
        if k == 0:
            terms.append((1.0, [(n, -0.5), (n - 1, -0.5)]))
        elif k == n:
            terms.append((0.0, [(1, 0.5)]))
        else:
            terms.append((0.0, [(n - k + 1, 0.5), (n - k - 1, -0.5)]))
    return terms


@dataclass(frozen=True)
class LambdaProfile:
    """Lipschitz-Killing limit vector with its full covariance.

    T(j) estimates for different j use independent streams; entries of the
    profile are linear in the T's, so the covariance is exact given the
    per-j variances.
    """

    values: np.ndarray
    cov: np.ndarray
    chi_link_value: int
    t_means: dict
    t_vars: dict
    n_samples: int
    n_degenerate: int

    @property
    def n(self) -> int:
        return self.values.shape[0] - 1

    def entry(self, k: int) -> McEstimate:
        return McEstimate(float(self.values[k]),
                          float(np.sqrt(max(self.cov[k, k], 0.0))),
                          self.n_samples, self.n_degenerate)

    def sum_entry(self) -> McEstimate:
        ones = np.ones(self.values.shape[0])
        var = float(ones @ self.cov @ ones)
        return McEstimate(float(self.values.sum()),
                          float(np.sqrt(max(var, 0.0))),
                          self.n_samples, self.n_degenerate)

    def linear_combination(self, weights) -> McEstimate:
        w = np.asarray(weights, dtype=float)
        var = float(w @ self.cov @ w)
        return McEstimate(float(w @ self.values),
                          float(np.sqrt(max(var, 0.0))),
                          self.n_samples, self.n_degenerate)


def _grassmann_link_mean(packed: PackedLink, n: int, j: int, n_samples: int,
                         seed: int, workers: int, config: Config):
    """E over H in G_n^j of chi(Lk(X ∩ H)) with batched link queries.

    Returns (mean, var_of_mean, n_degenerate).
    """
    rows = n - j

    def draw(i: int, attempt: int) -> np.ndarray:
        sid = i if attempt == 0 else (1 << 63) + (attempt - 1) * n_samples + i
        rng = SampleStream(seed, sid).generator()
        g = rng.standard_normal((n, j))
        q, _ = np.linalg.qr(g, mode="complete")
        return q[:, j:].T

    base = np.empty((n_samples, rows, n))
    for i in range(n_samples):
        base[i] = draw(i, 0)
    values = np.zeros(n_samples)
    pending = np.arange(n_samples)
    ndeg = 0
    attempt = 0
    while pending.size:
        if workers > 1 and pending.size >= 2 * workers:
            from concurrent.futures import ThreadPoolExecutor
            chunks = np.array_split(pending, workers)
            with ThreadPoolExecutor(max_workers=workers) as ex:
                parts = list(ex.map(
                    lambda ch: chi_link_batch_packed(packed, base[ch], config),
                    chunks))
            vals = np.concatenate([p[0] for p in parts])
            ok = np.concatenate([p[1] for p in parts])
        else:
            vals, ok = chi_link_batch_packed(packed, base[pending], config)
        values[pending[ok]] = vals[ok]
        pending = pending[~ok]
        ndeg += pending.size
        attempt += 1
        if pending.size and attempt >= config.max_retries:
            from .errors import DegeneracyBudgetExceeded
            raise DegeneracyBudgetExceeded("batched link estimator stalled")
        if ndeg > max(config.degeneracy_cap * n_samples, 8) and pending.size:
            from .errors import DegeneracyBudgetExceeded
            raise DegeneracyBudgetExceeded(
                f"{ndeg} degenerate Grassmannian draws out of {n_samples}")
        for i in pending:
            base[i] = draw(int(i), attempt)
    mean = float(values.mean())
    var = float(values.var(ddof=1) / n_samples) if n_samples > 1 else 0.0
    return mean, var, ndeg


def lambda_lim_profile(X: ConicGerm, n_samples: int, seed: int,
                       workers: int = 1,
                       config: Config = DEFAULT) -> LambdaProfile:
    """Lipschitz-Killing limits of a conic germ via the link formulas."""
    n = X.ambient_dim
    packed = pack_link_germ(X)
    chi_lk = chi_link_packed(packed, None, config).value
    t_means = {0: 0.0, n: float(chi_lk)}
    t_vars = {0: 0.0, n: 0.0}
    ndeg = 0
    for j in range(1, n):
        m, v, d = _grassmann_link_mean(packed, n, j, n_samples,
                                       derive_seed(seed, "T", j), workers,
                                       config)
        t_means[j] = m
        t_vars[j] = v
        ndeg += d
    terms = _lambda_terms(n)
    values = np.empty(n + 1)
    cov = np.zeros((n + 1, n + 1))
    for k, (const, parts) in enumerate(terms):
        values[k] = const + sum(c * t_means[j] for j, c in parts)
    for k1, (_, p1) in enumerate(terms):
        for k2, (_, p2) in enumerate(terms):
            cv = 0.0
            for j1, c1 in p1:
                for j2, c2 in p2:
                    if j1 == j2:
                        cv += c1 * c2 * t_vars[j1]
            cov[k1, k2] = cv
    return LambdaProfile(values, cov, chi_lk, t_means, t_vars,
                         n_samples, ndeg)


def _profile_from_t(n: int, t_values) -> np.ndarray:
    """Profile vector from a full T(0..n) value list (single realization)."""
    out = np.empty(n + 1)
    for k, (const, parts) in enumerate(_lambda_terms(n)):
        out[k] = const + sum(c * t_values[j] for j, c in parts)
    return out


# ---------------------------------------------------------------------------
# density

def density(X: ConicGerm, n_samples: int, seed: int, workers: int = 1,
            config: Config = DEFAULT) -> McEstimate:
    """Density of the germ at 0: spherical fraction in top dimension,
    otherwise the top-degree polar invariant (local Cauchy-Crofton)."""
    d = X.dim
    n = X.ambient_dim
    if d == n:
        return mc_estimate(_membership_indicator(X), n_samples, seed,
                           workers, config)
    return sigma_k(X, d, n_samples, seed, workers, config)


# ---------------------------------------------------------------------------
# two-germ estimators

def _pair_slice_packed(X: ConicGerm, Y: ConicGerm, R: Rotation,
                       v: np.ndarray, comp0: np.ndarray | None):
    if comp0 is not None:
        comp = np.ascontiguousarray(comp0 @ R.matrix.T)
        return pack_slice_flat(X, comp, v, 1.0)
    return pack_slice_pair(X, Y, R, v, 1.0)


def _rotation_from(rng: np.random.Generator, n: int) -> Rotation:
    while True:
        g = rng.standard_normal((n, n))
        q, r = np.linalg.qr(g)
        d = np.diag(r)
        if np.any(d == 0.0):
            continue
        q = q * np.sign(d)[None, :]
        if np.linalg.det(q) < 0:
            q[:, -1] = -q[:, -1]
        return Rotation(np.ascontiguousarray(q))


def _check_pair(X: ConicGerm, Y: ConicGerm):
    if X.ambient_dim != Y.ambient_dim:
        raise DimensionMismatch("pair estimators need a common ambient space")


def sigma_pair(X: ConicGerm, Y: ConicGerm, n_samples: int, seed: int,
               workers: int = 1, config: Config = DEFAULT) -> McEstimate:
    """sigma(X, Y, 0): mean over (rotation, sphere direction) of the
    stabilized chi(X ∩ (gamma Y + delta v) ∩ B)."""
    _check_pair(X, Y)
    n = X.ambient_dim
    comp0 = (orthonormal_complement(Y.flat_basis, n)
             if Y.flat_basis is not None else None)

    def integrand(stream: SampleStream) -> float:
        rng = stream.generator()
        R = _rotation_from(rng, n)
        v = sphere_in_subspace(rng, np.eye(n))
        packed = _pair_slice_packed(X, Y, R, v, comp0)
        return float(chi_ladder_packed(packed, config))

    return mc_estimate(integrand, n_samples, seed, workers, config)


def _inner_sphere_link_mean(link_pack: PackedLink, rng, n: int, n_inner: int,
                            extra_rows: np.ndarray | None,
                            config: Config) -> float:
    """Mean over u of chi(Lk(Z ∩ {u* = 0})), nested inside one sample."""
    k_extra = 0 if extra_rows is None else extra_rows.shape[0]
    base = np.empty((n_inner, k_extra + 1, n))
    for t in range(n_inner):
        if k_extra:
            base[t, :k_extra] = extra_rows
        base[t, k_extra] = sphere_in_subspace(rng, np.eye(n))
    vals, ok = chi_link_batch_packed(link_pack, base, config)
    tries = 0
    while not np.all(ok):
        tries += 1
        if tries > 16:
            raise DegenerateSample("inner sphere integral stalled")
        bad = np.where(~ok)[0]
        rebase = np.empty((bad.size, k_extra + 1, n))
        for t in range(bad.size):
            if k_extra:
                rebase[t, :k_extra] = extra_rows
            rebase[t, k_extra] = sphere_in_subspace(rng, np.eye(n))
        v2, ok2 = chi_link_batch_packed(link_pack, rebase, config)
        vals[bad[ok2]] = v2[ok2]
        newok = ok.copy()
        newok[bad[ok2]] = True
        ok = newok
    return float(vals.mean())


def lambda0_pair(X: ConicGerm, Y: ConicGerm, n_samples: int, seed: int,
                 workers: int = 1, config: Config = DEFAULT,
                 return_variant: bool = False):
    """Lambda_0^lim(X, Y, 0) through the per-sample Gauss-Bonnet relation:

        chi(slice) - chi(Lk(X ∩ gamma Y))/2
                   - E_u[chi(Lk(X ∩ gamma Y ∩ {u*=0}))]/2.

    The variant with full (instead of half) weight on the double integral
    is tracked alongside; the two disagree in the source relation and the
    half-weight form is the Gauss-Bonnet-consistent one.
    """
    _check_pair(X, Y)
    n = X.ambient_dim
    comp0 = (orthonormal_complement(Y.flat_basis, n)
             if Y.flat_basis is not None else None)

    def integrand(stream: SampleStream):
        rng = stream.generator()
        R = _rotation_from(rng, n)
        v = sphere_in_subspace(rng, np.eye(n))
        packed = _pair_slice_packed(X, Y, R, v, comp0)
        chi_slice_v = float(chi_ladder_packed(packed, config))
        link_pack = pack_link_pair(X, Y, R)
        lk = float(chi_link_packed(link_pack, None, config).value)
        inner = _inner_sphere_link_mean(link_pack, rng, n,
                                        config.inner_samples_pair, None,
                                        config)
        primary = chi_slice_v - 0.5 * lk - 0.5 * inner
        alt = chi_slice_v - 0.5 * lk - inner
        return (primary, alt)

    means, errs, ndeg = mc_estimate_vector(integrand, n_samples, seed, 2,
                                           workers, config)
    primary = McEstimate(float(means[0]), float(errs[0]), n_samples, ndeg)
    variant = McEstimate(float(means[1]), float(errs[1]), n_samples, ndeg)
    if return_variant:
        return primary, variant
    return primary


def beta0_bar(X: ConicGerm, k: int, n_samples: int, seed: int,
              workers: int = 1, config: Config = DEFAULT) -> McEstimate:
    """Mean over (H in G_n^{n-k}, v in S(H-perp)) of the per-sample
    Gauss-Bonnet value; equals Lambda_k^lim."""
    n = X.ambient_dim
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    link_pack = pack_link_germ(X)

    def integrand(stream: SampleStream) -> float:
        rng = stream.generator()
        g = rng.standard_normal((n, n - k))
        q, _ = np.linalg.qr(g, mode="complete")
        comp = np.ascontiguousarray(q[:, n - k:].T)
        v = sphere_in_subspace(rng, comp)
        packed = pack_slice_flat(X, comp, v, 1.0)
        chi_slice_v = float(chi_ladder_packed(packed, config))
        lk = float(chi_link_packed(link_pack, comp, config).value)
        inner = _inner_sphere_link_mean(link_pack, rng, n,
                                        config.inner_samples, comp, config)
        return chi_slice_v - 0.5 * lk - 0.5 * inner

    return mc_estimate(integrand, n_samples, seed, workers, config)


def pair_lambda_profile(X: ConicGerm, Y: ConicGerm, n_samples: int,
                        seed: int, workers: int = 1,
                        config: Config = DEFAULT):
    """E over rotations of the Lipschitz-Killing limit profile of the
    intersection germ X ∩ gamma Y (cells in constraint form).

    Inner Grassmannian integrals use a fixed nested sample count.
    Returns (means[0..n], stderrs[0..n], n_degenerate).
    """
    _check_pair(X, Y)
    n = X.ambient_dim
    n_inner = config.inner_samples_pair

    def integrand(stream: SampleStream):
        rng = stream.generator()
        R = _rotation_from(rng, n)
        link_pack = pack_link_pair(X, Y, R)
        t_vals = {0: 0.0,
                  n: float(chi_link_packed(link_pack, None, config).value)}
        for j in range(1, n):
            base = np.empty((n_inner, n - j, n))
            for t in range(n_inner):
                g = rng.standard_normal((n, j))
                q, _ = np.linalg.qr(g, mode="complete")
                base[t] = q[:, j:].T
            vals, ok = chi_link_batch_packed(link_pack, base, config)
            tries = 0
            while not np.all(ok):
                tries += 1
                if tries > 16:
                    raise DegenerateSample("nested Grassmannian stalled")
                bad = np.where(~ok)[0]
                rebase = np.empty((bad.size, n - j, n))
                for t in range(bad.size):
                    g = rng.standard_normal((n, j))
                    q, _ = np.linalg.qr(g, mode="complete")
                    rebase[t] = q[:, j:].T
                v2, ok2 = chi_link_batch_packed(link_pack, rebase, config)
                vals[bad[ok2]] = v2[ok2]
                no = ok.copy()
                no[bad[ok2]] = True
                ok = no
            t_vals[j] = float(vals.mean())
        return _profile_from_t(n, t_vals)

    means, errs, ndeg = mc_estimate_vector(integrand, n_samples, seed,
                                           n + 1, workers, config)
    return means, errs, ndeg


# ---------------------------------------------------------------------------
# assembled profile

@dataclass(frozen=True)
class InvariantProfile:
    """sigma, lambda_lim, and density of one germ, with uncertainties."""

    label: str
    dim: int
    ambient_dim: int
    sigma: tuple                 # McEstimate per degree
    lam: LambdaProfile
    theta: McEstimate

    def lambda_entries(self):
        return [self.lam.entry(k) for k in range(self.ambient_dim + 1)]


def invariant_profile(X: ConicGerm, n_samples: int, seed: int,
                      workers: int = 1,
                      config: Config = DEFAULT) -> InvariantProfile:
    sig = sigma_profile(X, n_samples, derive_seed(seed, "sigma-profile"),
                        workers, config)
    lam = lambda_lim_profile(X, n_samples, derive_seed(seed, "lambda"),
                             workers, config)
    th = density(X, n_samples, derive_seed(seed, "theta"), workers, config)
    return InvariantProfile(X.label, X.dim, X.ambient_dim, tuple(sig), lam, th)
