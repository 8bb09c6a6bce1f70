import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kinelab import geometry as G
from kinelab.config import DEFAULT
from kinelab.errors import InvalidAnchor
from kinelab.feasibility import (ConvexCell, Status, cone_cell_has_nonzero_point,
                                 min_norm_distance, polyhedron_nonempty)
from kinelab.oracles import feasibility_oracle_suite


def cell_1d(lo, hi):
    # lo <= x <= hi
    return ConvexCell(np.array([[-1.0], [1.0]]), np.array([-lo, hi]))


def test_interval_nonempty():
    v = polyhedron_nonempty(cell_1d(0.0, 1.0))
    assert v.status is Status.NONEMPTY
    assert -1e-8 <= v.witness[0] <= 1 + 1e-8


def test_interval_empty():
    assert polyhedron_nonempty(cell_1d(1.0, 0.0)).status is Status.EMPTY


def test_halfplane_distance():
    cell = ConvexCell(np.array([[-1.0, 0.0]]), np.array([-2.0]))
    v = min_norm_distance(cell, np.zeros(2))
    assert abs(v.distance - 2.0) < 1e-9


def test_point_distance_pythagorean():
    cell = ConvexCell(np.zeros((0, 2)), np.zeros(0),
                      np.eye(2), np.array([3.0, 4.0]))
    v = min_norm_distance(cell, np.zeros(2))
    assert abs(v.distance - 5.0) < 1e-9


def test_ball_classification_bands():
    cell = ConvexCell(np.array([[-1.0, 0.0]]), np.array([-2.0]))
    assert min_norm_distance(cell, np.zeros(2), 3.0).status is Status.NONEMPTY
    assert min_norm_distance(cell, np.zeros(2), 1.0).status is Status.EMPTY
    assert min_norm_distance(cell, np.zeros(2), 2.0).status is Status.DEGENERATE


def test_distance_cross_solver():
    # independent QP implementation: scipy SLSQP on random polytopes
    from scipy.optimize import minimize
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 60:
        n = int(rng.integers(1, 4))
        m = int(rng.integers(1, 9))
        A = rng.standard_normal((m, n))
        b = rng.standard_normal(m) * 0.8
        cell = ConvexCell(A, b)
        v0 = polyhedron_nonempty(cell)
        if v0.status is not Status.NONEMPTY:
            continue
        checked += 1
        v = min_norm_distance(cell, np.zeros(n))
        ref = minimize(lambda x: 0.5 * x @ x, v0.witness,
                       constraints=[{"type": "ineq",
                                     "fun": lambda x: b - A @ x}],
                       method="SLSQP", options={"maxiter": 400, "ftol": 1e-16})
        dref = np.sqrt(2 * max(ref.fun, 0.0))
        assert abs(v.distance - dref) < 1e-6 * (1 + dref)


def test_rational_oracle_agreement():
    res = feasibility_oracle_suite(500, seed=20240809)
    assert res["degenerate"] < 0.01 * res["total"]
    assert res["agree"] == res["decided"]


def test_monotonicity_adding_constraints():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(1, 4))
        m = int(rng.integers(1, 8))
        A = rng.standard_normal((m, n))
        b = rng.standard_normal(m) * 0.5
        before = polyhedron_nonempty(ConvexCell(A, b)).status
        A2 = np.vstack([A, rng.standard_normal((1, n))])
        b2 = np.concatenate([b, rng.standard_normal(1) * 0.5])
        after = polyhedron_nonempty(ConvexCell(A2, b2)).status
        if before is Status.EMPTY:
            assert after is not Status.NONEMPTY


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_witness_validity(case):
    rng = np.random.default_rng(case)
    n = int(rng.integers(1, 5))
    m = int(rng.integers(1, 12))
    A = rng.standard_normal((m, n))
    b = rng.standard_normal(m)
    v = polyhedron_nonempty(ConvexCell(A, b))
    if v.status is Status.NONEMPTY:
        nrm = np.linalg.norm(A, axis=1)
        assert np.max((A @ v.witness - b) / np.maximum(nrm, 1e-12)) <= 1e-8 * (
            1 + np.linalg.norm(v.witness))


def test_scale_invariance_of_cone_queries():
    rng = np.random.default_rng(7)
    cone = G.build_cone(rng.standard_normal((2, 3)))
    line = rng.standard_normal(3)
    line /= np.linalg.norm(line)
    cell = ConvexCell(-cone.pinv, np.zeros(2),
                      cone.complement, np.zeros(1))
    base = cone_cell_has_nonzero_point(cell, cone)
    for s in (1e-3, 7.0, 1e4):
        scaled = ConvexCell(-cone.pinv * s, np.zeros(2),
                            cone.complement * s, np.zeros(1))
        assert cone_cell_has_nonzero_point(scaled, cone) == base


def test_nonzero_point_examples():
    ray = G.build_cone([[1.0, 0.0]])
    cell = ConvexCell(-ray.pinv, np.zeros(1), ray.complement, np.zeros(1))
    assert cone_cell_has_nonzero_point(cell, ray) is True
    # ray cut by {x1 = 0}: only the origin survives
    cut = ConvexCell(-ray.pinv, np.zeros(1),
                     np.vstack([ray.complement, [[1.0, 0.0]]]), np.zeros(2))
    assert cone_cell_has_nonzero_point(cut, ray) is False


def test_nonzero_point_angle_oracle(quadrant):
    cone = quadrant.cones[0]
    rng = np.random.default_rng(13)
    for _ in range(200):
        theta = rng.uniform(0, np.pi)
        d = np.array([np.cos(theta), np.sin(theta)])
        normal = np.array([-d[1], d[0]])
        cell = ConvexCell(-cone.pinv, np.zeros(2), normal[None, :], np.zeros(1))
        got = cone_cell_has_nonzero_point(cell, cone)
        expected = (d >= 0).all() or (d <= 0).all()
        if min(abs(theta), abs(theta - np.pi / 2), abs(theta - np.pi)) > 1e-6:
            assert got == expected


def test_invalid_anchor():
    origin = G.build_cone([], ambient_dim=2)
    cell = ConvexCell(np.zeros((0, 2)), np.zeros(0))
    with pytest.raises(InvalidAnchor):
        cone_cell_has_nonzero_point(cell, origin)
