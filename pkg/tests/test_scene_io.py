import json

import numpy as np
import pytest

from kinelab import corpus
from kinelab.errors import SchemaError
from kinelab.kinematics import LawEntry, VerificationReport
from kinelab.sampling import McEstimate
from kinelab.scene_io import (emit_report, fingerprint, parse_report,
                              parse_scene, scene_from_dict, scene_to_dict)


def test_parse_minimal_halfline_scene():
    doc = '{"ambient_dim":2,"germs":{"X":{"cones":[{"generators":[[1,0]]}]}}}'
    scene = parse_scene(doc)
    assert scene.germs["X"].contains([3.0, 0.0])
    assert not scene.germs["X"].contains([0.0, 1.0])


def test_flat_sugar_expands_to_two_rays():
    doc = {"ambient_dim": 2,
           "germs": {"H": {"type": "flat", "dim": 1, "basis": [[0, 1]]}}}
    scene = scene_from_dict(doc)
    g = scene.germs["H"]
    assert len(g.cones) == 2
    assert g.contains([0.0, 2.0]) and g.contains([0.0, -2.0])


def test_full_space_sugar():
    doc = {"ambient_dim": 2, "germs": {"F": {"type": "full_space"}}}
    scene = scene_from_dict(doc)
    assert len(scene.germs["F"].cones) == 4


def test_rank_deficient_reports_json_path():
    doc = {"ambient_dim": 2,
           "germs": {"X": {"cones": [{"generators": [[1, 0], [2, 0]]}]}}}
    with pytest.raises(SchemaError) as err:
        scene_from_dict(doc)
    assert "$.germs.X.cones[0]" in str(err.value)


def test_unknown_major_version_rejected():
    doc = {"schema_version": "2.0", "ambient_dim": 2, "germs": {}}
    with pytest.raises(SchemaError):
        scene_from_dict(doc)


def test_scene_round_trip_fingerprint():
    scene = corpus.pair_scenes()["quadrant__line2"]
    doc = scene_to_dict(scene)
    again = scene_from_dict(doc)
    assert scene.germs.keys() == again.germs.keys()
    assert again.germs["X"].contains([1.0, 1.0])
    d1 = scene_to_dict(again)
    assert fingerprint(doc) == fingerprint(d1)


def _tiny_report():
    rep = VerificationReport("fp123", 42, 100)
    rep.entries.append(LawEntry(
        "THM_8_15", "", McEstimate(0.75, 0.01, 100, 0),
        McEstimate(0.74, 0.02, 100, 1), "PASS", 0.33, 0.01))
    rep.entries.append(LawEntry(
        "COR_3_6", "sum", McEstimate(1.0, 0.0, 100, 0),
        McEstimate.exact_value(1.0), "PASS", 0.0, 0.0, note="telescopes"))
    return rep


def test_report_json_round_trip():
    rep = _tiny_report()
    text = emit_report(rep, "json")
    back = parse_report(text)
    assert back.scene_fingerprint == rep.scene_fingerprint
    assert back.entries == rep.entries
    assert emit_report(back, "json") == text


def test_report_formats():
    rep = _tiny_report()
    csv = emit_report(rep, "csv")
    assert csv.splitlines()[0].startswith("law,component")
    assert len(csv.splitlines()) == 3
    md = emit_report(rep, "markdown")
    assert "THM_8_15" in md and "PASS" in md
    empty = VerificationReport("fp", 1, 10)
    assert emit_report(empty, "csv").strip() == (
        "law,component,lhs_mean,lhs_stderr,rhs_mean,rhs_stderr,"
        "z,abs_diff,verdict")
    json.loads(emit_report(empty, "json"))


def test_seventeen_digit_serialization():
    rep = VerificationReport("fp", 1, 10)
    v = 0.1 + 0.2           # famous non-representable sum
    rep.entries.append(LawEntry("THM_8_15", "", McEstimate(v, 0.0, 10, 0),
                                McEstimate.exact_value(v), "PASS", 0.0, 0.0))
    back = parse_report(emit_report(rep, "json"))
    assert back.entries[0].lhs.mean == v


def test_fingerprint_sensitivity():
    a = {"ambient_dim": 2, "germs": {"X": {"cones": [
        {"generators": [[1.0, 0.0]]}]}}, "schema_version": "1.0",
        "polytope_unions": {}}
    b = json.loads(json.dumps(a))
    b["germs"]["X"]["cones"][0]["generators"][0][0] = 1.0 + 1e-12
    assert fingerprint(a) != fingerprint(b)
    assert fingerprint(a) == fingerprint(json.loads(json.dumps(a)))


def test_duplicate_names_rejected():
    doc = {"ambient_dim": 2,
           "germs": {"X": {"cones": []}},
           "polytope_unions": {"X": {"polytopes": []}}}
    with pytest.raises(SchemaError):
        scene_from_dict(doc)
