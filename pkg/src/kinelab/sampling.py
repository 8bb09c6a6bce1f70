"""Haar rotations, sphere and Grassmannian sampling, reproducible Monte Carlo.

One counter-based RNG stream per sample index (Philox keyed by
(seed, stream_id)), so every estimate is bit-reproducible regardless of
worker count or scheduling. Degenerate samples are replaced by fresh
streams from a reserved id range and counted.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Config
from .errors import DegenerateSample, DegeneracyBudgetExceeded, Unstable
from .geometry import AffineFlat, Rotation, orthonormal_complement

__all__ = [
    "SampleStream",
    "McEstimate",
    "sample_rotation",
    "sample_sphere",
    "sample_grassmannian",
    "mc_estimate",
    "mc_estimate_vector",
    "derive_seed",
]

RETRY_BASE = 1 << 63
_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class SampleStream:
    seed: int
    stream_id: int

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _MASK, self.stream_id & _MASK],
                       dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def derive_seed(*parts) -> int:
    """Stable 64-bit sub-seed from string/int parts (sha256 based)."""
    import hashlib
    txt = ":".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(txt.encode()).digest()[:8], "big")


def sample_rotation(stream: SampleStream, n: int) -> Rotation:
    """Haar-distributed element of SO(n).

    QR of an iid standard-normal matrix with the R-diagonal sign fix gives
    Haar measure on O(n); negating the final column when det < 0 lands the
    draw in SO(n).
    """
    rng = stream.generator()
    while True:
        g = rng.standard_normal((n, n))
        q, r = np.linalg.qr(g)
        d = np.diag(r)
        if np.any(d == 0.0):            # probability zero; redraw
            continue
        q = q * np.sign(d)[None, :]
        if np.linalg.det(q) < 0:
            q[:, -1] = -q[:, -1]
        return Rotation(q)


def sample_sphere(stream: SampleStream, n: int) -> np.ndarray:
    """Uniform point of S^(n-1): a normalized Gaussian vector."""
    rng = stream.generator()
    while True:
        g = rng.standard_normal(n)
        norm = np.linalg.norm(g)
        if norm > 1e-12:
            return g / norm


def sphere_in_subspace(rng: np.random.Generator,
                       basis_rows: np.ndarray) -> np.ndarray:
    """Uniform unit vector inside span(basis_rows) (orthonormal rows)."""
    k = basis_rows.shape[0]
    while True:
        g = rng.standard_normal(k)
        norm = np.linalg.norm(g)
        if norm > 1e-12:
            return (g / norm) @ basis_rows


def sample_grassmannian(stream: SampleStream, n: int, k: int) -> AffineFlat:
    """O(n)-invariant random k-dimensional linear subspace of R^n."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    rng = stream.generator()
    if k == 0:
        return AffineFlat(np.zeros(n), np.zeros((0, n)), np.eye(n))
    g = rng.standard_normal((n, k))
    q, _ = np.linalg.qr(g, mode="complete")
    basis = np.ascontiguousarray(q[:, :k].T)
    comp = np.ascontiguousarray(q[:, k:].T)
    return AffineFlat(np.zeros(n), basis, comp)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_samples: int
    n_degenerate: int = 0
    exact: bool = False

    @staticmethod
    def exact_value(v: float) -> "McEstimate":
        return McEstimate(float(v), 0.0, 0, 0, True)

    @property
    def var(self) -> float:
        return self.stderr ** 2


def _welford(values: np.ndarray):
    mean = 0.0
    m2 = 0.0
    for i, v in enumerate(values):
        d = v - mean
        mean += d / (i + 1)
        m2 += d * (v - mean)
    n = len(values)
    sd = np.sqrt(m2 / (n - 1)) if n > 1 else 0.0
    return mean, sd / np.sqrt(n) if n else 0.0


def _run_indexed(fn, n_samples: int, workers: int):
    """Evaluate fn(i) for i in range(n_samples); order-stable reduction."""
    if workers <= 1:
        return [fn(i) for i in range(n_samples)]
    out = [None] * n_samples
    chunk = max(64, n_samples // (8 * workers) or 1)
    spans = [(s, min(s + chunk, n_samples))
             for s in range(0, n_samples, chunk)]

    def run_span(span):
        s, e = span
        return s, [fn(i) for i in range(s, e)]

    with ThreadPoolExecutor(max_workers=workers) as ex:
        for s, vals in ex.map(run_span, spans):
            out[s:s + len(vals)] = vals
    return out


def mc_estimate(integrand, n_samples: int, seed: int, workers: int = 1,
                config: Config = DEFAULT) -> McEstimate:
    """Monte Carlo mean of integrand(stream) with per-sample streams.

    integrand raises DegenerateSample (or Unstable) to discard a draw; the
    sample is retried on a reserved stream id, deterministically.
    """
    if n_samples < 2:
        raise ValueError("need n_samples >= 2")
    values, ndeg = _collect(integrand, n_samples, seed, workers, config)
    mean, se = _welford(values)
    return McEstimate(mean, se, n_samples, ndeg)


def _sample_value(integrand, i, n_samples, seed, config):
    ndeg = 0
    for attempt in range(config.max_retries):
        sid = i if attempt == 0 else RETRY_BASE + (attempt - 1) * n_samples + i
        try:
            return integrand(SampleStream(seed, sid)), ndeg
        except (DegenerateSample, Unstable):
            ndeg += 1
    raise DegeneracyBudgetExceeded(
        f"sample {i} degenerate after {config.max_retries} retries")


def _collect(integrand, n_samples, seed, workers, config):
    results = _run_indexed(
        lambda i: _sample_value(integrand, i, n_samples, seed, config),
        n_samples, workers)
    ndeg = sum(r[1] for r in results)
    if ndeg > config.degeneracy_cap * n_samples:
        raise DegeneracyBudgetExceeded(
            f"{ndeg} degenerate samples out of {n_samples} "
            f"(cap {config.degeneracy_cap:.3%})")
    return np.array([float(r[0]) for r in results]), ndeg


def mc_estimate_vector(integrand, n_samples: int, seed: int, dim: int,
                       workers: int = 1, config: Config = DEFAULT):
    """Vector-valued Monte Carlo: per-component Welford over shared samples.

    Returns (means, stderrs, n_degenerate).
    """
    if n_samples < 2:
        raise ValueError("need n_samples >= 2")
    results = _run_indexed(
        lambda i: _sample_value(integrand, i, n_samples, seed, config),
        n_samples, workers)
    ndeg = sum(r[1] for r in results)
    if ndeg > config.degeneracy_cap * n_samples:
        raise DegeneracyBudgetExceeded(
            f"{ndeg} degenerate samples out of {n_samples}")
    vals = np.array([np.asarray(r[0], dtype=float) for r in results])
    if vals.shape != (n_samples, dim):
        raise ValueError("integrand returned the wrong vector shape")
    means = np.empty(dim)
    errs = np.empty(dim)
    for j in range(dim):
        means[j], errs[j] = _welford(vals[:, j])
    return means, errs, ndeg
