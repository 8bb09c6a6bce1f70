"""Curated example scenes: the germs and pairs the verification suite runs on.

Fans are built from facets of convex hulls of random spherical points, so
their cones have pairwise disjoint interiors and meet along common faces.
"""

from __future__ import annotations

import numpy as np

from .geometry import (ConicGerm, build_cone, flat_cone_union,
                       full_space_germ, germ)
from .scene_io import Scene, scene_from_dict, scene_to_dict


def ray(n: int, direction=None, label="ray") -> ConicGerm:
    d = np.eye(n)[0] if direction is None else np.asarray(direction, float)
    return germ([build_cone([d])], ambient_dim=n, label=label)


def line(n: int, direction=None, label="line") -> ConicGerm:
    d = np.eye(n)[0] if direction is None else np.asarray(direction, float)
    return flat_cone_union([d], n, label=label)


def wedge(angle_deg: float, label=None) -> ConicGerm:
    a = np.deg2rad(angle_deg)
    return germ([build_cone([[1.0, 0.0], [np.cos(a), np.sin(a)]])],
                ambient_dim=2, label=label or f"wedge{angle_deg:g}")


def ray_bundle(angles_deg, label="rays") -> ConicGerm:
    cones = [build_cone([[np.cos(np.deg2rad(a)), np.sin(np.deg2rad(a))]])
             for a in angles_deg]
    return germ(cones, ambient_dim=2, label=label)


def spherical_cone(directions, label="cone3") -> ConicGerm:
    """Cone over a finite point set on S^2: one ray per direction."""
    cones = [build_cone([np.asarray(d, float)]) for d in directions]
    return germ(cones, ambient_dim=3, label=label)


def hull_fan(seed: int, n_facets: int, n_points: int = 8,
             label=None) -> ConicGerm:
    """Simplicial fan from facets of the hull of random spherical points."""
    from scipy.spatial import ConvexHull
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((n_points, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    hull = ConvexHull(pts)
    cones = [build_cone(pts[s]) for s in hull.simplices[:n_facets]]
    return germ(cones, ambient_dim=3, label=label or f"fan{seed}x{n_facets}")


def square_vertices(side: float, center) -> list:
    cx, cy = center
    h = side / 2.0
    return [[cx - h, cy - h], [cx + h, cy - h], [cx + h, cy + h],
            [cx - h, cy + h]]


def _scene(n, germs, unions=None, meta=None) -> Scene:
    doc = {"schema_version": "1.0", "ambient_dim": n, "germs": germs,
           "polytope_unions": unions or {}, "metadata": meta or {}}
    return scene_from_dict(doc)


def _cones_doc(g: ConicGerm) -> dict:
    if g.flat_basis is not None:
        return {"type": "flat", "dim": int(g.flat_basis.shape[0]),
                "basis": g.flat_basis.tolist()}
    return {"cones": [{"generators": c.generators.tolist()}
                      for c in g.cones]}


def scene_of(germs: dict, unions: dict | None = None,
             meta: dict | None = None) -> Scene:
    n = next(iter(germs.values())).ambient_dim if germs else (
        next(iter(unions.values())).ambient_dim)
    gdoc = {name: _cones_doc(g) for name, g in germs.items()}
    udoc = {}
    for name, u in (unions or {}).items():
        udoc[name] = {"polytopes": [{"vertices": p.vertices.tolist()}
                                    for p in u.polytopes]}
    return _scene(n, gdoc, udoc, meta)


def corpus_germs() -> dict:
    """The single-germ corpus used by the cross-estimator suites."""
    return {
        "ray1": ray(1, label="ray1"),
        "line1": full_space_germ(1, label="line1"),
        "halfline2": ray(2, label="halfline2"),
        "line2": line(2, label="line2"),
        "quadrant": germ([build_cone([[1.0, 0.0], [0.0, 1.0]])],
                         ambient_dim=2, label="quadrant"),
        "fullplane": full_space_germ(2, label="fullplane"),
        "two_rays": ray_bundle([0.0, 120.0], label="two_rays"),
        "wedge60": wedge(60.0),
        "octant": germ([build_cone(np.eye(3))], ambient_dim=3,
                       label="octant"),
        "plane3": flat_cone_union(np.eye(3)[:2], 3, label="plane3"),
        "three_rays3": spherical_cone(
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-0.6, -0.4,
                                                np.sqrt(1 - 0.52)]],
            label="three_rays3"),
        "fan3a": hull_fan(11, 3, label="fan3a"),
    }


def pair_scenes() -> dict:
    """Two-germ scenes for the kinematic formula suite (criterion corpus)."""
    g = corpus_germs()
    g["fan4a"] = hull_fan(1, 4, label="fan4a")
    g["fan4b"] = hull_fan(2, 4, label="fan4b")
    pairs = [
        ("line2", "line2"),
        ("quadrant", "line2"),
        ("halfline2", "line2"),
        ("halfline2", "quadrant"),
        ("quadrant", "quadrant"),
        ("fullplane", "quadrant"),
        ("two_rays", "line2"),
        ("wedge60", "halfline2"),
        ("octant", "plane3"),
        ("fan4a", "fan4b"),
        ("three_rays3", "plane3"),
    ]
    out = {}
    for a, b in pairs:
        name = f"{a}__{b}"
        out[name] = scene_of({"X": g[a], "Y": g[b]},
                             meta={"name": name})
    return out


def single_scenes() -> dict:
    return {name: scene_of({"X": g}, meta={"name": name})
            for name, g in corpus_germs().items()}


def prop61_scene() -> Scene:
    g = corpus_germs()
    return scene_of(
        {"X": g["quadrant"]},
        unions={"Y": _square_union()},
        meta={"name": "prop61_quadrant_square"})


def _square_union():
    from .geometry import PolytopeUnion, build_polytope
    verts = square_vertices(0.4, (0.3, 0.3))
    return PolytopeUnion(2, (build_polytope(verts),), label="square")
