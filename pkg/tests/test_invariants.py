import math

import numpy as np
import pytest

from kinelab import geometry as G
from kinelab import invariants as I
from kinelab.config import DEFAULT

N = 4000
SEED = 42


def tol(*ests, floor=0.02):
    return max(floor, 3 * np.sqrt(sum(e.stderr ** 2 for e in ests)))


# ---------------------------------------------------------------------------
# constants

def test_sphere_and_ball_volumes():
    assert abs(I.sphere_volume(0) - 2.0) < 1e-14
    assert abs(I.sphere_volume(1) - 2 * math.pi) < 1e-14
    assert abs(I.sphere_volume(2) - 4 * math.pi) < 1e-13
    assert abs(I.ball_volume(0) - 1.0) < 1e-14
    assert abs(I.ball_volume(1) - 2.0) < 1e-14
    assert abs(I.ball_volume(2) - math.pi) < 1e-14
    assert abs(I.ball_volume(3) - 4 * math.pi / 3) < 1e-13


def test_gamma_based_volumes_high_accuracy():
    # relative accuracy of the Gamma evaluation, checked against exact
    # factorial / double-factorial closed forms up to high dimension
    for k in range(1, 60):
        if k % 2 == 0:
            exact = math.pi ** (k // 2) / math.factorial(k // 2)
        else:
            exact = (2.0 ** k * math.pi ** ((k - 1) // 2)
                     * math.factorial((k - 1) // 2) / math.factorial(k))
        assert abs(I.ball_volume(k) - exact) <= 1e-12 * exact


def test_e_coefficient():
    c = I.Constants.for_dimension(3)
    # e(n, n, n) = s_n: s_{p+q-n} s_n / (s_p s_q) with p = q = n
    assert abs(c.e(3, 3) - I.sphere_volume(3) ** 2 / I.sphere_volume(3) ** 2
               * I.sphere_volume(3) / I.sphere_volume(3)) >= 0  # smoke
    assert abs(c.e(2, 3, 3) - I.sphere_volume(2) * I.sphere_volume(3)
               / (I.sphere_volume(2) * I.sphere_volume(3))) < 1e-14
    with pytest.raises(ValueError):
        c.e(1, 1, 3)


def test_m_coefficient_formula():
    c = I.Constants.for_dimension(4)
    b = I.ball_volume
    assert abs(c.m(1, 2) - (b(2) / (b(1) * b(1)) * 2 - b(1) / (b(0) * b(1)))) < 1e-14
    assert abs(c.m(2, 3) - (b(3) / (b(1) * b(2)) * 3 - b(2) / (b(0) * b(2)))) < 1e-14


def test_sigma_to_lambda_loc_unit_vectors():
    n = 3
    c = I.Constants.for_dimension(n)
    for k in range(n + 1):
        sigma = np.eye(n + 1)[k]
        out = I.sigma_to_lambda_loc(sigma)
        for i in range(1, n + 1):
            if i == k:
                assert out[i - 1] == 1.0          # unitriangular diagonal
            elif i < k:
                assert abs(out[i - 1] - c.m(i, k)) < 1e-14
            else:
                assert out[i - 1] == 0.0


def test_sigma_to_lambda_loc_top_degree():
    # Lambda_d^loc = sigma_d when sigma vanishes above degree d
    sigma = np.array([1.0, 0.75, 0.25, 0.0])
    out = I.sigma_to_lambda_loc(sigma)
    assert out[-1] == 0.0
    assert abs(out[1] - 0.25) < 1e-14


# ---------------------------------------------------------------------------
# single-germ estimators against angle oracles

def test_halfline_profile(halfline):
    sig = I.sigma_profile(halfline, N, SEED)
    assert sig[0].exact and sig[0].mean == 1.0
    assert abs(sig[1].mean - 0.5) <= tol(sig[1])
    assert abs(sig[2].mean - 0.0) <= tol(sig[2])
    lam = I.lambda_lim_profile(halfline, N, SEED)
    for k, want in enumerate((0.5, 0.5, 0.0)):
        assert abs(lam.values[k] - want) <= tol(lam.entry(k))
    th = I.density(halfline, N, SEED)
    assert abs(th.mean - 0.5) <= tol(th)


def test_quadrant_profile(quadrant):
    sig = I.sigma_profile(quadrant, N, SEED)
    for k, want in enumerate((1.0, 0.75, 0.25)):
        assert abs(sig[k].mean - want) <= tol(sig[k])
    lam = I.lambda_lim_profile(quadrant, N, SEED)
    for k, want in enumerate((0.25, 0.5, 0.25)):
        assert abs(lam.values[k] - want) <= tol(lam.entry(k))


def test_fullplane_profile(fullplane):
    lam = I.lambda_lim_profile(fullplane, N, SEED)
    for k, want in enumerate((0.0, 0.0, 1.0)):
        assert abs(lam.values[k] - want) <= tol(lam.entry(k))
    th = I.density(fullplane, N, SEED)
    assert abs(th.mean - 1.0) <= 1e-12


def test_line_density_is_one(xline):
    th = I.density(xline, N, SEED)
    assert abs(th.mean - 1.0) <= tol(th)


def test_lambda_sum_is_one(quadrant, octant):
    for g in (quadrant, octant):
        lam = I.lambda_lim_profile(g, 2000, SEED)
        s = lam.sum_entry()
        assert abs(s.mean - 1.0) <= max(1e-9, 3 * s.stderr)


def test_octant_density(octant):
    th = I.density(octant, 8000, SEED)
    assert abs(th.mean - 0.125) <= tol(th)


def test_thm_3_8_cross_check(quadrant):
    sig = I.sigma_profile(quadrant, N, SEED)
    lam = I.lambda_lim_profile(quadrant, N, SEED + 1)
    for k in range(3):
        rhs = sig[k].mean - (sig[k + 1].mean if k < 2 else 0.0)
        se = np.sqrt(lam.entry(k).var + sig[k].var
                     + (sig[k + 1].var if k < 2 else 0.0))
        assert abs(lam.values[k] - rhs) <= max(0.02, 3 * se)


def test_sigma_k_validation(quadrant):
    with pytest.raises(ValueError):
        I.sigma_k(quadrant, 5, 100, 0)
    assert I.sigma_k(quadrant, 0, 100, 0).exact


# ---------------------------------------------------------------------------
# two-germ estimators

def test_sigma_pair_quadrant_line(quadrant, xline):
    est = I.sigma_pair(quadrant, xline, N, 7)
    assert abs(est.mean - 0.75) <= tol(est)


def test_sigma_pair_full_space_partner(quadrant, fullplane):
    est = I.sigma_pair(quadrant, fullplane, 1500, 7)
    assert abs(est.mean - 1.0) <= tol(est)


def test_sigma_pair_two_lines_bezout(xline):
    est = I.sigma_pair(xline, xline, N, 7)
    assert abs(est.mean - 1.0) <= tol(est)


def test_lambda0_pair_two_lines(xline):
    est = I.lambda0_pair(xline, xline, 2000, 11)
    assert abs(est.mean - 1.0) <= tol(est)


def test_lambda0_pair_full_space_partner(quadrant, fullplane):
    # with Y = R^n the pair limit degenerates to Lambda_0^lim(X)
    est = I.lambda0_pair(quadrant, fullplane, 2000, 11)
    lam = I.lambda_lim_profile(quadrant, 2000, 12)
    assert abs(est.mean - lam.values[0]) <= tol(est, lam.entry(0))


def test_beta0_bar_halfline(halfline):
    est = I.beta0_bar(halfline, 1, 1500, 3)
    assert abs(est.mean - 0.5) <= tol(est)
    est2 = I.beta0_bar(halfline, 2, 1500, 3)
    assert abs(est2.mean - 0.0) <= tol(est2)


def test_beta0_bar_fullplane(fullplane):
    est = I.beta0_bar(fullplane, 2, 1500, 3)
    assert abs(est.mean - 1.0) <= tol(est)


def test_pair_profile_two_lines(xline):
    means, errs, nd = I.pair_lambda_profile(xline, xline, 1000, 5)
    # generic intersection is the origin: profile (1, 0, 0)
    for k, want in enumerate((1.0, 0.0, 0.0)):
        assert abs(means[k] - want) <= max(0.02, 3 * errs[k])


def test_dimension_mismatch_raises(quadrant, octant):
    from kinelab.errors import DimensionMismatch
    with pytest.raises(DimensionMismatch):
        I.sigma_pair(quadrant, octant, 100, 0)
