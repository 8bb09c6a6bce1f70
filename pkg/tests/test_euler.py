import numpy as np
import pytest

from kinelab import geometry as G
from kinelab.config import DEFAULT
from kinelab.errors import DegenerateSample, Unstable
from kinelab.euler import (CellUnionQuery, ChiResult, Mode, chi_link,
                           chi_link_section, chi_slice, euler_of_union,
                           full_lattice_euler, stabilized_chi_limit)
from kinelab.feasibility import ConvexCell
from kinelab.oracles import euler_oracle_suite
from kinelab.sampling import SampleStream, sample_rotation


def ball_cell(A, b, radius=1.0):
    A = np.asarray(A, dtype=float)
    return ConvexCell(A, np.asarray(b, dtype=float),
                      ball=(np.zeros(A.shape[1]), radius))


def test_disjoint_compact_union():
    cells = (ball_cell([[1.0]], [-0.5]), ball_cell([[-1.0]], [-0.5]))
    r = euler_of_union(CellUnionQuery(cells, Mode.COMPACT_UNION))
    assert r.value == 2


def test_single_convex_cell_chi_one():
    r = euler_of_union(CellUnionQuery((ball_cell([[1.0, 0.0]], [0.5]),),
                                      Mode.COMPACT_UNION))
    assert r.value == 1


def test_empty_query_chi_zero():
    r = euler_of_union(CellUnionQuery((), Mode.COMPACT_UNION))
    assert r.value == 0


def test_link_full_plane_is_circle(fullplane):
    assert chi_link(fullplane) == 0


def test_link_quadrant_is_arc(quadrant):
    assert chi_link(quadrant) == 1


def test_link_octant(octant):
    assert chi_link(octant) == 1


def test_link_full_space_r3():
    assert chi_link(G.full_space_germ(3)) == 2      # chi(S^2)


def test_valuation_identity_random_pairs():
    from kinelab.feasibility import Status, polyhedron_nonempty
    rng = np.random.default_rng(21)
    done = 0
    while done < 120:
        n = int(rng.integers(1, 4))
        A1 = rng.standard_normal((int(rng.integers(1, 4)), n))
        A2 = rng.standard_normal((int(rng.integers(1, 4)), n))
        b1 = rng.standard_normal(A1.shape[0]) * 0.4
        b2 = rng.standard_normal(A2.shape[0]) * 0.4
        c1, c2 = ball_cell(A1, b1), ball_cell(A2, b2)
        # both cells must be nonempty in the ball for chi(A)=chi(B)=1
        try:
            chi_a = euler_of_union(CellUnionQuery((c1,), Mode.COMPACT_UNION)).value
            chi_b = euler_of_union(CellUnionQuery((c2,), Mode.COMPACT_UNION)).value
            if chi_a != 1 or chi_b != 1:
                continue
            union = euler_of_union(CellUnionQuery((c1, c2),
                                                  Mode.COMPACT_UNION)).value
            inter = ConvexCell(np.vstack([A1, A2]), np.concatenate([b1, b2]),
                               ball=(np.zeros(n), 1.0))
            chi_i = euler_of_union(CellUnionQuery((inter,),
                                                  Mode.COMPACT_UNION)).value
        except DegenerateSample:
            continue
        assert union + chi_i == chi_a + chi_b
        done += 1


def test_pruned_equals_full_lattice():
    res = euler_oracle_suite(400, max_cells=6, seed=99)
    assert res["agree"] == res["total"] == 400


def test_chi_slice_two_transversal_lines(xline):
    yline = G.flat_cone_union([[0.0, 1.0]], 2)
    R = sample_rotation(SampleStream(3, 5), 2)
    r = chi_slice(xline, yline, R, np.array([0.6, 0.8]), delta=0.05)
    assert r.value == 1


def test_chi_slice_quadrant_against_full_plane(quadrant, fullplane):
    R = sample_rotation(SampleStream(3, 6), 2)
    r = chi_slice(quadrant, fullplane, R, np.array([0.6, 0.8]), delta=0.05)
    assert r.value == 1


def test_chi_slice_origin_misses_lower_dim_partner(xline):
    origin = G.germ([G.build_cone([], ambient_dim=2)], label="origin")
    R = sample_rotation(SampleStream(3, 7), 2)
    r = chi_slice(origin, xline, R, np.array([0.6, 0.8]), delta=0.05)
    assert r.value == 0


def test_chi_slice_flat_fast_path_matches_expansion(quadrant):
    from kinelab.geometry import linear_flat
    rng = np.random.default_rng(17)
    for i in range(40):
        d = rng.standard_normal(2)
        d /= np.linalg.norm(d)
        flat = linear_flat([d], 2)
        germ_form = G.flat_cone_union([d], 2)
        R = sample_rotation(SampleStream(8, i), 2)
        v = rng.standard_normal(2)
        v /= np.linalg.norm(v)
        try:
            a = chi_slice(quadrant, flat, R, v, delta=0.03).value
            b = chi_slice(quadrant, germ_form, R, v, delta=0.03).value
        except DegenerateSample:
            continue
        assert a == b


def test_chi_link_section_examples(halfline, fullplane, quadrant):
    # generic line through 0 misses a ray
    u = np.array([[0.3, 0.7]])
    assert chi_link_section(halfline, u).value == 0
    # generic line pierces the full plane in two antipodal points
    assert chi_link_section(fullplane, u).value == 2
    assert chi_link_section(quadrant).value == 1


def test_stabilized_limit_constant():
    assert stabilized_chi_limit(lambda d: 7) == 7


def test_stabilized_limit_transient():
    calls = []

    def ev(d):
        calls.append(d)
        return 2 if len(calls) == 1 else 1

    assert stabilized_chi_limit(ev) == 1
    assert len(calls) == 3


def test_stabilized_limit_unstable():
    state = {"i": 0}

    def ev(d):
        state["i"] += 1
        return state["i"]

    with pytest.raises(Unstable):
        stabilized_chi_limit(ev)


def test_stabilized_limit_conic_rung_independence(quadrant, xline):
    # on conic scenes, once the ladder value stabilizes two rungs agree
    R = sample_rotation(SampleStream(12, 0), 2)
    v = np.array([0.8, -0.6])
    values = [chi_slice(quadrant, xline, R, v, delta=d).value
              for d in (1e-3, 2.5e-4)]
    assert values[0] == values[1]


def test_rotation_equivariance(quadrant, xline):
    rng = np.random.default_rng(31)
    Q = sample_rotation(SampleStream(14, 0), 2)
    for i in range(30):
        R = sample_rotation(SampleStream(15, i), 2)
        v = rng.standard_normal(2)
        v /= np.linalg.norm(v)
        try:
            a = chi_slice(quadrant, xline, R, v, delta=0.01).value
            b = chi_slice(G.rotate_germ(Q, quadrant),
                          G.rotate_germ(Q, xline),
                          Q.compose(R.compose(
                              G.Rotation(Q.matrix.T))),
                          Q.matrix @ v, delta=0.01).value
        except DegenerateSample:
            continue
        assert a == b


def test_scale_invariance_conic(quadrant, xline):
    rng = np.random.default_rng(41)
    for i in range(30):
        R = sample_rotation(SampleStream(16, i), 2)
        v = rng.standard_normal(2)
        v /= np.linalg.norm(v)
        try:
            base = chi_slice(quadrant, xline, R, v, 0.02, radius=1.0).value
            for lam in (0.5, 2.0):
                scaled = chi_slice(quadrant, xline, R, v, 0.02 * lam,
                                   radius=lam).value
                assert scaled == base
        except DegenerateSample:
            continue


def test_budget_exceeded():
    from kinelab.errors import BudgetExceeded
    cells = tuple(ball_cell(np.zeros((1, 2)), [1.0]) for _ in range(30))
    q = CellUnionQuery(cells, Mode.COMPACT_UNION)
    with pytest.raises(BudgetExceeded):
        euler_of_union(q, DEFAULT.replace(subset_budget=100))
