"""Scene and report serialization.

Scenes are JSON documents; numbers serialize with 17 significant digits
(lossless for 64-bit floats) and the scene fingerprint is the sha256 of
the canonicalized document. Reports carry no volatile fields, so a fixed
(scene, samples, seed) always produces byte-identical output.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError
from .geometry import (ConicGerm, PolytopeUnion, build_cone, build_polytope,
                       flat_cone_union, full_space_germ, germ)
from .kinematics import LawEntry, VerificationReport
from .sampling import McEstimate

__all__ = ["Scene", "parse_scene", "scene_from_dict", "scene_to_dict",
           "fingerprint", "emit_report", "parse_report",
           "profile_to_dict", "emit_profile"]

SCHEMA_VERSION = "1.0"


def _fmt(x: float) -> float:
    return float(format(float(x), ".17g")) + 0.0   # + 0.0 clears -0.0


def _canonical(obj) -> str:
    def enc(o):
        if isinstance(o, float):
            return format(o, ".17g")
        raise TypeError(o)
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=enc)


def fingerprint(obj) -> str:
    return hashlib.sha256(_canonical(obj).encode()).hexdigest()


@dataclass(frozen=True)
class Scene:
    ambient_dim: int
    germs: dict
    polytope_unions: dict
    metadata: dict = field(default_factory=dict)
    fingerprint: str = ""


def _require(cond, path, msg):
    if not cond:
        raise SchemaError(f"{path}: {msg}")


def scene_from_dict(doc: dict) -> Scene:
    _require(isinstance(doc, dict), "$", "scene must be a JSON object")
    version = str(doc.get("schema_version", SCHEMA_VERSION))
    major = version.split(".")[0]
    _require(major == SCHEMA_VERSION.split(".")[0], "$.schema_version",
             f"unsupported major version {version!r}")
    _require("ambient_dim" in doc, "$", "missing ambient_dim")
    n = doc["ambient_dim"]
    _require(isinstance(n, int) and n >= 1, "$.ambient_dim",
             "must be an integer >= 1")

    germs = {}
    for name, spec in dict(doc.get("germs", {})).items():
        path = f"$.germs.{name}"
        _require(isinstance(spec, dict), path, "germ must be an object")
        kind = spec.get("type", "cones")
        if kind == "flat":
            _require("dim" in spec, path, "flat needs a dim")
            k = spec["dim"]
            _require(isinstance(k, int) and 0 <= k <= n, f"{path}.dim",
                     f"flat dim must be in [0, {n}]")
            basis = spec.get("basis")
            if basis is None:
                basis = np.eye(n)[:k]
            basis = np.asarray(basis, dtype=float)
            _require(basis.shape == (k, n), f"{path}.basis",
                     f"expected {k} basis vectors of length {n}")
            germs[name] = flat_cone_union(basis, n, label=name)
        elif kind == "full_space":
            germs[name] = full_space_germ(n, label=name)
        elif kind == "cones":
            cones = []
            raw = spec.get("cones", [])
            _require(isinstance(raw, list), f"{path}.cones", "must be a list")
            for idx, c in enumerate(raw):
                cpath = f"{path}.cones[{idx}]"
                _require(isinstance(c, dict) and "generators" in c, cpath,
                         "cone needs a generators list")
                try:
                    cones.append(build_cone(c["generators"], ambient_dim=n))
                except Exception as exc:
                    raise SchemaError(f"{cpath}: {exc}") from exc
            germs[name] = ConicGerm(n, tuple(cones), label=name)
        else:
            raise SchemaError(f"{path}.type: unknown germ type {kind!r}")

    unions = {}
    for name, spec in dict(doc.get("polytope_unions", {})).items():
        path = f"$.polytope_unions.{name}"
        _require(isinstance(spec, dict), path, "must be an object")
        polys = []
        for idx, p in enumerate(spec.get("polytopes", [])):
            ppath = f"{path}.polytopes[{idx}]"
            _require(isinstance(p, dict) and "vertices" in p, ppath,
                     "polytope needs a vertices list")
            V = np.asarray(p["vertices"], dtype=float)
            _require(V.ndim == 2 and V.shape[1] == n, ppath,
                     f"vertices must be points in R^{n}")
            try:
                polys.append(build_polytope(V))
            except Exception as exc:
                raise SchemaError(f"{ppath}: {exc}") from exc
        unions[name] = PolytopeUnion(n, tuple(polys), label=name)

    names = list(germs) + list(unions)
    _require(len(names) == len(set(names)), "$",
             "germ and polytope names must be unique")
    return Scene(n, germs, unions, dict(doc.get("metadata", {})),
                 fingerprint(_scene_core_dict(doc)))


def _scene_core_dict(doc: dict) -> dict:
    return {
        "schema_version": str(doc.get("schema_version", SCHEMA_VERSION)),
        "ambient_dim": doc["ambient_dim"],
        "germs": doc.get("germs", {}),
        "polytope_unions": doc.get("polytope_unions", {}),
    }


def parse_scene(text: str) -> Scene:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return scene_from_dict(doc)


def scene_to_dict(scene: Scene) -> dict:
    germs = {}
    for name, g in scene.germs.items():
        if g.flat_basis is not None:
            germs[name] = {"type": "flat", "dim": int(g.flat_basis.shape[0]),
                           "basis": [[_fmt(v) for v in row]
                                     for row in g.flat_basis]}
        else:
            germs[name] = {"cones": [
                {"generators": [[_fmt(v) for v in row]
                                for row in c.generators]}
                for c in g.cones]}
    unions = {}
    for name, u in scene.polytope_unions.items():
        unions[name] = {"polytopes": [
            {"vertices": [[_fmt(v) for v in row] for row in p.vertices]}
            for p in u.polytopes]}
    return {"schema_version": SCHEMA_VERSION, "ambient_dim": scene.ambient_dim,
            "germs": germs, "polytope_unions": unions,
            "metadata": scene.metadata}


# ---------------------------------------------------------------------------
# reports

def _estimate_dict(e: McEstimate) -> dict:
    return {"mean": _fmt(e.mean), "stderr": _fmt(e.stderr),
            "n_samples": e.n_samples, "n_degenerate": e.n_degenerate,
            "exact": e.exact}


def _estimate_from(d: dict) -> McEstimate:
    return McEstimate(d["mean"], d["stderr"], d["n_samples"],
                      d["n_degenerate"], d["exact"])


def report_to_dict(report: VerificationReport) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "verification_report",
        "scene_fingerprint": report.scene_fingerprint,
        "seed": report.seed,
        "n_samples": report.n_samples,
        "entries": [
            {"law": e.law, "component": e.component,
             "lhs": _estimate_dict(e.lhs), "rhs": _estimate_dict(e.rhs),
             "z": _fmt(e.z) if np.isfinite(e.z) else "inf",
             "abs_diff": _fmt(e.abs_diff), "verdict": e.verdict,
             "note": e.note}
            for e in report.entries],
    }


def parse_report(text: str) -> VerificationReport:
    doc = json.loads(text)
    if doc.get("kind") != "verification_report":
        raise SchemaError("not a verification report")
    major = str(doc.get("schema_version", "")).split(".")[0]
    if major != SCHEMA_VERSION.split(".")[0]:
        raise SchemaError(f"unsupported schema version")
    rep = VerificationReport(doc["scene_fingerprint"], doc["seed"],
                             doc["n_samples"])
    for e in doc["entries"]:
        z = float("inf") if e["z"] == "inf" else float(e["z"])
        rep.entries.append(LawEntry(
            e["law"], e["component"], _estimate_from(e["lhs"]),
            _estimate_from(e["rhs"]), e["verdict"], z, float(e["abs_diff"]),
            e.get("note", "")))
    return rep


def emit_report(report: VerificationReport, fmt: str = "json") -> str:
    if fmt == "json":
        return _canonical(report_to_dict(report)) + "\n"
    if fmt == "csv":
        out = io.StringIO()
        out.write("law,component,lhs_mean,lhs_stderr,rhs_mean,rhs_stderr,"
                  "z,abs_diff,verdict\n")
        for e in report.entries:
            out.write(",".join([
                e.law, e.component, format(e.lhs.mean, ".17g"),
                format(e.lhs.stderr, ".17g"), format(e.rhs.mean, ".17g"),
                format(e.rhs.stderr, ".17g"),
                format(e.z, ".17g") if np.isfinite(e.z) else "inf",
                format(e.abs_diff, ".17g"), e.verdict]) + "\n")
        return out.getvalue()
    if fmt == "markdown":
        out = io.StringIO()
        out.write(f"| law | component | lhs | rhs | z | verdict |\n")
        out.write("|---|---|---|---|---|---|\n")
        for e in report.entries:
            lhs = f"{e.lhs.mean:.5f} ± {e.lhs.stderr:.5f}"
            rhs = (f"{e.rhs.mean:.5f}" if e.rhs.exact
                   else f"{e.rhs.mean:.5f} ± {e.rhs.stderr:.5f}")
            z = f"{e.z:.2f}" if np.isfinite(e.z) else "inf"
            out.write(f"| {e.law} | {e.component} | {lhs} | {rhs} | {z} "
                      f"| {e.verdict} |\n")
        return out.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# invariant profiles

def profile_to_dict(profile, scene_fp: str, seed: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "invariant_profile",
        "scene_fingerprint": scene_fp,
        "seed": seed,
        "germ": profile.label,
        "dim": profile.dim,
        "ambient_dim": profile.ambient_dim,
        "sigma": [_estimate_dict(s) for s in profile.sigma],
        "lambda_lim": [_estimate_dict(e) for e in profile.lambda_entries()],
        "lambda_loc": [_fmt(v) for v in _lambda_loc_of(profile)],
        "theta": _estimate_dict(profile.theta),
    }


def _lambda_loc_of(profile):
    from .invariants import sigma_to_lambda_loc
    return sigma_to_lambda_loc([s.mean for s in profile.sigma])


def emit_profile(profile, scene_fp: str, seed: int, fmt: str = "json") -> str:
    doc = profile_to_dict(profile, scene_fp, seed)
    if fmt == "json":
        return _canonical(doc) + "\n"
    if fmt == "csv":
        out = io.StringIO()
        out.write("quantity,degree,mean,stderr\n")
        for k, s in enumerate(doc["sigma"]):
            out.write(f"sigma,{k},{s['mean']:.17g},{s['stderr']:.17g}\n")
        for k, s in enumerate(doc["lambda_lim"]):
            out.write(f"lambda_lim,{k},{s['mean']:.17g},{s['stderr']:.17g}\n")
        for k, v in enumerate(doc["lambda_loc"]):
            out.write(f"lambda_loc,{k + 1},{v:.17g},0\n")
        t = doc["theta"]
        out.write(f"theta,{doc['dim']},{t['mean']:.17g},{t['stderr']:.17g}\n")
        return out.getvalue()
    if fmt == "markdown":
        out = io.StringIO()
        out.write(f"## Invariant profile: {doc['germ']} "
                  f"(dim {doc['dim']} in R^{doc['ambient_dim']})\n\n")
        out.write("| degree | sigma | lambda_lim |\n|---|---|---|\n")
        for k in range(doc["ambient_dim"] + 1):
            s = doc["sigma"][k]
            l = doc["lambda_lim"][k]
            out.write(f"| {k} | {s['mean']:.5f} ± {s['stderr']:.5f} "
                      f"| {l['mean']:.5f} ± {l['stderr']:.5f} |\n")
        t = doc["theta"]
        out.write(f"\ndensity: {t['mean']:.5f} ± {t['stderr']:.5f}\n")
        return out.getvalue()
    raise ValueError(f"unknown format {fmt!r}")
