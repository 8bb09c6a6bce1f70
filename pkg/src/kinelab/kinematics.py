"""Evaluate both sides of every scoped kinematic law and report agreement.

Left and right sides of a law never share random streams: sub-seeds are
derived by hashing (base seed, law id, side, component). Verdicts combine a
z-score gate with an absolute-tolerance gate because integer-valued
integrands can have tiny standard errors on symmetric scenes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Config
from .errors import UnsupportedScene
from .euler import (chi_compact_packed, pack_polytope_flat,
                    pack_polytope_scene)
from .geometry import ConicGerm, PolytopeUnion, Rotation, flat_cone_union
from .invariants import (LambdaProfile, beta0_bar, density,
                         lambda_lim_profile, lambda0_pair,
                         pair_lambda_profile, sigma_k, sigma_pair,
                         sigma_profile)
from .sampling import McEstimate, SampleStream, derive_seed, mc_estimate

__all__ = ["LAWS", "LawEntry", "VerificationReport", "verify", "verify_all",
           "normalize_law_id"]

LAWS = ("THM_3_8", "COR_3_6", "THM_3_7", "CAUCHY_CROFTON", "PROP_4_20",
        "PROP_4_21", "PROP_6_1", "PROP_7_2", "THM_8_15", "COR_BEZOUT",
        "THM_8_16", "PROP_9_1", "COR_9_2")

_SINGLE = {"THM_3_8", "COR_3_6", "THM_3_7", "CAUCHY_CROFTON", "PROP_4_21"}
_PAIR = {"PROP_4_20", "PROP_7_2", "THM_8_15", "COR_BEZOUT", "THM_8_16",
         "PROP_9_1", "COR_9_2"}
_POLY = {"PROP_6_1"}


def normalize_law_id(text: str) -> str:
    """Accept 'thm8.15', 'THM_8_15', 'bezout', ... and return a law id."""
    t = text.strip().upper().replace(".", "_").replace("-", "_")
    aliases = {
        "THM3_8": "THM_3_8", "THM8_15": "THM_8_15", "THM8_16": "THM_8_16",
        "THM3_7": "THM_3_7", "COR3_6": "COR_3_6", "PROP4_20": "PROP_4_20",
        "PROP4_21": "PROP_4_21", "PROP6_1": "PROP_6_1",
        "PROP7_2": "PROP_7_2", "PROP9_1": "PROP_9_1", "COR9_2": "COR_9_2",
        "BEZOUT": "COR_BEZOUT", "CAUCHY_CROFTON": "CAUCHY_CROFTON",
        "CAUCHYCROFTON": "CAUCHY_CROFTON",
    }
    t2 = t.replace("_", "")
    for k, v in aliases.items():
        if t == k or t == v or t2 == k.replace("_", ""):
            return v
    if t in LAWS:
        return t
    raise UnsupportedScene(
        f"unknown law id {text!r}; valid ids: {', '.join(LAWS)}")


@dataclass(frozen=True)
class LawEntry:
    law: str
    component: str
    lhs: McEstimate
    rhs: McEstimate
    verdict: str
    z: float
    abs_diff: float
    note: str = ""

    @staticmethod
    def build(law, component, lhs, rhs, config: Config, note="") -> "LawEntry":
        diff = abs(lhs.mean - rhs.mean)
        se = float(np.sqrt(lhs.var + rhs.var))
        if se > 0:
            z = diff / se
        else:
            z = 0.0 if diff == 0 else float("inf")
        if z <= config.z_pass or diff <= config.abs_tol:
            verdict = "PASS"
        elif z > config.z_fail and diff > config.abs_tol:
            verdict = "FAIL"
        else:
            verdict = "INCONCLUSIVE"
        return LawEntry(law, component, lhs, rhs, verdict, z, diff, note)


@dataclass
class VerificationReport:
    scene_fingerprint: str
    seed: int
    n_samples: int
    entries: list = field(default_factory=list)
    wall_time: float = 0.0          # not serialized: reports are byte-stable

    @property
    def failed(self) -> bool:
        return any(e.verdict == "FAIL" for e in self.entries)


def _combine_product(a: McEstimate, b: McEstimate) -> McEstimate:
    mean = a.mean * b.mean
    var = a.mean ** 2 * b.var + b.mean ** 2 * a.var + a.var * b.var
    return McEstimate(mean, float(np.sqrt(var)),
                      max(a.n_samples, b.n_samples),
                      a.n_degenerate + b.n_degenerate,
                      a.exact and b.exact)


def _profile_dot_sigma(lam: LambdaProfile, sig: list) -> McEstimate:
    """sum_i Lambda_i * sigma_(n-i) with exact covariance on the profile."""
    n = lam.n
    w = np.array([sig[n - i].mean for i in range(n + 1)])
    mean = float(w @ lam.values)
    var = float(w @ lam.cov @ w)
    var += sum(lam.values[i] ** 2 * sig[n - i].var for i in range(n + 1))
    ndeg = lam.n_degenerate + sum(s.n_degenerate for s in sig)
    return McEstimate(mean, float(np.sqrt(max(var, 0.0))), lam.n_samples, ndeg)


def _profile_dot_profile(a: LambdaProfile, b: LambdaProfile,
                         weights_b: np.ndarray) -> McEstimate:
    """sum_i a_i * (weights_b applied to b), for THM_8_16 / COR_9_2 shapes.

    weights_b[i] must be a linear functional w_i . b.values; its value and
    variance propagate through both profile covariances.
    """
    n = a.n
    vb = np.array([float(weights_b[i] @ b.values) for i in range(n + 1)])
    mean = float(vb @ a.values)
    var = float(vb @ a.cov @ vb)
    wa = np.zeros(n + 1)
    for i in range(n + 1):
        wa += a.values[i] * weights_b[i]
    var += float(wa @ b.cov @ wa)
    return McEstimate(mean, float(np.sqrt(max(var, 0.0))),
                      max(a.n_samples, b.n_samples),
                      a.n_degenerate + b.n_degenerate)


# ---------------------------------------------------------------------------
# polytope-scene estimators (Prop 6.1)

def _chi_polytope_rotated(X: ConicGerm, Y: PolytopeUnion, n_samples, seed,
                          workers, config) -> McEstimate:
    """E over rotations of chi(X ∩ gamma Y); Y must sit in the unit ball."""
    n = X.ambient_dim

    def integrand(stream: SampleStream) -> float:
        rng = stream.generator()
        from .invariants import _rotation_from
        R = _rotation_from(rng, n)
        packed = pack_polytope_scene(X, Y, R, 1.0)
        return float(chi_compact_packed(packed, None, config).value)

    return mc_estimate(integrand, n_samples, seed, workers, config)


def _chi_polytope_flat_mean(Y: PolytopeUnion, i: int, n_samples, seed,
                            workers, config) -> McEstimate:
    """E over i-planes H of chi(Y ∩ H); exact at i = 0 and i = n."""
    n = Y.ambient_dim
    if i == 0:
        return McEstimate.exact_value(1.0 if Y.contains(np.zeros(n)) else 0.0)
    if i == n:
        packed = pack_polytope_flat(Y, np.zeros((0, n)), 1.0)
        return McEstimate.exact_value(
            float(chi_compact_packed(packed, None, config).value))

    def integrand(stream: SampleStream) -> float:
        rng = stream.generator()
        g = rng.standard_normal((n, i))
        q, _ = np.linalg.qr(g, mode="complete")
        comp = np.ascontiguousarray(q[:, i:].T)
        packed = pack_polytope_flat(Y, comp, 1.0)
        return float(chi_compact_packed(packed, None, config).value)

    return mc_estimate(integrand, n_samples, seed, workers, config)


# ---------------------------------------------------------------------------
# law evaluation

def _seed_for(seed, law, side, comp="") -> int:
    return derive_seed(seed, law, side, comp)


def _entry_profiles(law, X, Y, n_samples, seed, workers, config):
    lamX = lambda_lim_profile(X, n_samples, _seed_for(seed, law, "rhs", "lamX"),
                              workers, config)
    lamY = lambda_lim_profile(Y, n_samples, _seed_for(seed, law, "rhs", "lamY"),
                              workers, config)
    return lamX, lamY


def verify(law: str, scene, n_samples: int, seed: int, workers: int = 1,
           config: Config = DEFAULT) -> list:
    """Evaluate one law on a scene; returns a list of LawEntry."""
    law = normalize_law_id(law)
    germs = list(scene.germs.values())
    if law in _SINGLE:
        if not germs:
            raise UnsupportedScene(f"{law} needs a germ")
        return _verify_single(law, germs[0], n_samples, seed, workers, config)
    if law in _PAIR:
        if len(germs) < 2:
            raise UnsupportedScene(f"{law} needs two germs")
        X, Y = germs[0], germs[1]
        if X.ambient_dim < 2:
            raise UnsupportedScene(
                "two-germ laws need ambient dimension >= 2: SO(1) is trivial "
                "and cannot realize the invariant averaging on S^0")
        return _verify_pair(law, X, Y, n_samples, seed, workers, config)
    # PROP_6_1
    if not germs or not scene.polytope_unions:
        raise UnsupportedScene("PROP_6_1 needs a germ and a polytope union")
    Y = list(scene.polytope_unions.values())[0]
    return _verify_prop61(germs[0], Y, n_samples, seed, workers, config)


def _verify_single(law, X, n_samples, seed, workers, config):
    n = X.ambient_dim
    entries = []
    if law == "THM_3_8":
        lam = lambda_lim_profile(X, n_samples, _seed_for(seed, law, "lhs"),
                                 workers, config)
        sig = sigma_profile(X, n_samples, _seed_for(seed, law, "rhs"),
                            workers, config)
        for k in range(n + 1):
            lhs = lam.entry(k)
            if k < n:
                m = sig[k].mean - sig[k + 1].mean
                v = sig[k].var + sig[k + 1].var
                rhs = McEstimate(m, float(np.sqrt(v)), n_samples,
                                 sig[k].n_degenerate + sig[k + 1].n_degenerate)
            else:
                rhs = sig[n]
            entries.append(LawEntry.build(law, f"k={k}", lhs, rhs, config))
    elif law == "COR_3_6":
        lam = lambda_lim_profile(X, n_samples, _seed_for(seed, law, "lhs"),
                                 workers, config)
        entries.append(LawEntry.build(
            law, "sum", lam.sum_entry(), McEstimate.exact_value(1.0), config,
            note="profile sum telescopes for the link-formula estimator; "
                 "the informative cross-checks are THM_3_8 and THM_3_7"))
    elif law == "THM_3_7":
        lam = lambda_lim_profile(X, n_samples, _seed_for(seed, law, "rhs"),
                                 workers, config)
        for k in range(1, n + 1):
            lhs = beta0_bar(X, k, n_samples,
                            _seed_for(seed, law, "lhs", f"k={k}"),
                            workers, config)
            entries.append(LawEntry.build(law, f"k={k}", lhs, lam.entry(k),
                                          config))
    elif law == "CAUCHY_CROFTON":
        lhs = density(X, n_samples, _seed_for(seed, law, "lhs"), workers,
                      config)
        rhs = sigma_k(X, X.dim, n_samples, _seed_for(seed, law, "rhs"),
                      workers, config)
        entries.append(LawEntry.build(law, f"d={X.dim}", lhs, rhs, config))
    elif law == "PROP_4_21":
        if n < 2:
            raise UnsupportedScene(
                "PROP_4_21 averages over SO(n); trivial group at n = 1")
        ks = sorted({1, X.dim} & set(range(1, n + 1)))
        for k in ks:
            flat = flat_cone_union(
                _random_flat_basis(n, n - k, _seed_for(seed, law, "H", k)),
                n, label=f"H{n - k}")
            lhs = sigma_pair(X, flat, n_samples,
                             _seed_for(seed, law, "lhs", k), workers, config)
            rhs = sigma_k(X, k, n_samples, _seed_for(seed, law, "rhs", k),
                          workers, config)
            entries.append(LawEntry.build(law, f"k={k}", lhs, rhs, config))
    else:
        raise UnsupportedScene(law)
    return entries


def _random_flat_basis(n, dim, seed):
    rng = SampleStream(seed, 0).generator()
    if dim == 0:
        return np.zeros((0, n))
    g = rng.standard_normal((n, dim))
    q, _ = np.linalg.qr(g)
    return q.T[:dim]


def _verify_pair(law, X, Y, n_samples, seed, workers, config):
    n = X.ambient_dim
    entries = []
    if law == "PROP_4_20":
        lhs = sigma_pair(X, Y, n_samples, _seed_for(seed, law, "lhs"),
                         workers, config)
        rhs = sigma_pair(Y, X, n_samples, _seed_for(seed, law, "rhs"),
                         workers, config)
        entries.append(LawEntry.build(law, "sym", lhs, rhs, config))
    elif law in ("THM_8_15", "PROP_7_2"):
        lhs = sigma_pair(X, Y, n_samples, _seed_for(seed, law, "lhs"),
                         workers, config)
        lamX = lambda_lim_profile(X, n_samples,
                                  _seed_for(seed, law, "rhs", "lam"),
                                  workers, config)
        sigY = sigma_profile(Y, n_samples, _seed_for(seed, law, "rhs", "sig"),
                             workers, config)
        rhs = _profile_dot_sigma(lamX, sigY)
        entries.append(LawEntry.build(law, "", lhs, rhs, config))
    elif law == "COR_BEZOUT":
        if X.dim + Y.dim != n:
            raise UnsupportedScene(
                "COR_BEZOUT needs germs of complementary dimensions")
        lhs = sigma_pair(X, Y, n_samples, _seed_for(seed, law, "lhs"),
                         workers, config)
        tx = density(X, n_samples, _seed_for(seed, law, "rhs", "tx"),
                     workers, config)
        ty = density(Y, n_samples, _seed_for(seed, law, "rhs", "ty"),
                     workers, config)
        entries.append(LawEntry.build(law, "", lhs, _combine_product(tx, ty),
                                      config))
    elif law == "THM_8_16":
        lhs, alt = lambda0_pair(X, Y, n_samples, _seed_for(seed, law, "lhs"),
                                workers, config, return_variant=True)
        lamX, lamY = _entry_profiles(law, X, Y, n_samples, seed, workers,
                                     config)
        weights = [np.eye(n + 1)[n - i] for i in range(n + 1)]
        rhs = _profile_dot_profile(lamX, lamY, weights)
        note = ""
        dv = abs(lhs.mean - alt.mean)
        if dv > 3 * float(np.sqrt(lhs.var + alt.var)) + 1e-12:
            note = (f"full-weight double-integral variant gives "
                    f"{alt.mean:.4f} +- {alt.stderr:.4f}; the Gauss-Bonnet-"
                    f"consistent half weight is reported")
        entries.append(LawEntry.build(law, "", lhs, rhs, config, note=note))
    elif law in ("PROP_9_1", "COR_9_2"):
        means, errs, ndeg = pair_lambda_profile(
            X, Y, n_samples, _seed_for(seed, law, "lhs"), workers, config)
        lamX, lamY = _entry_profiles(law, X, Y, n_samples, seed, workers,
                                     config)
        if law == "PROP_9_1":
            for k in range(1, n + 1):
                lhs = McEstimate(float(means[k]), float(errs[k]), n_samples,
                                 ndeg)
                weights = []
                for i in range(n + 1):
                    w = np.zeros(n + 1)
                    j = k + n - i
                    if 0 <= j <= n:
                        w[j] = 1.0
                    weights.append(w)
                rhs = _profile_dot_profile(lamX, lamY, weights)
                entries.append(LawEntry.build(law, f"k={k}", lhs, rhs, config))
        else:
            lhs = McEstimate(float(means[0]), float(errs[0]), n_samples, ndeg)
            weights = []
            for i in range(n + 1):
                w = np.zeros(n + 1)
                w[:n - i + 1] = 1.0
                weights.append(w)
            rhs = _profile_dot_profile(lamX, lamY, weights)
            entries.append(LawEntry.build(law, "k=0", lhs, rhs, config))
    else:
        raise UnsupportedScene(law)
    return entries


def _verify_prop61(X, Y, n_samples, seed, workers, config):
    n = X.ambient_dim
    if Y.ambient_dim != n:
        raise UnsupportedScene("PROP_6_1 needs matching dimensions")
    if Y.max_vertex_norm() > 1.0 + 1e-9:
        raise UnsupportedScene("PROP_6_1 needs Y inside the unit ball")
    law = "PROP_6_1"
    lhs = _chi_polytope_rotated(X, Y, n_samples, _seed_for(seed, law, "lhs"),
                                workers, config)
    lam = lambda_lim_profile(X, n_samples, _seed_for(seed, law, "rhs", "lam"),
                             workers, config)
    hs = [_chi_polytope_flat_mean(Y, i, n_samples,
                                  _seed_for(seed, law, "rhs", f"h{i}"),
                                  workers, config)
          for i in range(n + 1)]
    mean = float(sum(lam.values[i] * hs[i].mean for i in range(n + 1)))
    w = np.array([h.mean for h in hs])
    var = float(w @ lam.cov @ w)
    var += sum(lam.values[i] ** 2 * hs[i].var for i in range(n + 1))
    rhs = McEstimate(mean, float(np.sqrt(max(var, 0.0))), n_samples,
                     lam.n_degenerate + sum(h.n_degenerate for h in hs))
    return [LawEntry.build(law, "", lhs, rhs, DEFAULT if config is None
                           else config)]


def applicable_laws(scene) -> list:
    """Laws the scene's declared inputs support, in registry order."""
    germs = list(scene.germs.values())
    out = []
    n = germs[0].ambient_dim if germs else 0
    for law in LAWS:
        if law in _SINGLE and germs:
            if law == "PROP_4_21" and n < 2:
                # sigma(X, H) averages over SO(n); trivial group at n = 1
                continue
            out.append(law)
        elif law in _PAIR and len(germs) >= 2 and n >= 2:
            if law == "COR_BEZOUT" and germs[0].dim + germs[1].dim != n:
                continue
            out.append(law)
        elif law in _POLY and germs and scene.polytope_unions:
            Y = list(scene.polytope_unions.values())[0]
            if Y.max_vertex_norm() <= 1.0 + 1e-9:
                out.append(law)
    return out


def verify_all(scene, n_samples: int, seed: int, workers: int = 1,
               config: Config = DEFAULT) -> VerificationReport:
    """Run every applicable law; laws run sequentially, MC fans out inside."""
    if not scene.germs and not scene.polytope_unions:
        raise UnsupportedScene("scene declares no inputs")
    t0 = time.time()
    report = VerificationReport(scene.fingerprint, seed, n_samples)
    for law in applicable_laws(scene):
        report.entries.extend(
            verify(law, scene, n_samples, seed, workers, config))
    report.wall_time = time.time() - t0
    return report
